#!/usr/bin/env python3
"""Independent reference pipeline over the bundled fixture corpus.

Re-derives per-repository finding profiles, scores, surface shares, and the
conditional co-occurrence matrix straight from the fixture analyzer outputs,
and writes the golden tables under fixtures/golden/. Shares no code with the
production implementation; used to pin expected values for the test suite.

Run from the repository root:  python3 tools/oracle/pipeline_oracle.py
"""

import csv
import json
import math
import os
import re
import sys

sys.path.insert(0, os.path.dirname(__file__))
import catalog_oracle as oracle  # noqa: E402

ROOT = os.path.join(os.path.dirname(__file__), "..", "..")
CORPUS = os.path.join(ROOT, "fixtures", "corpus")
GOLDEN = os.path.join(ROOT, "fixtures", "golden")
DATA = os.path.join(ROOT, "crates", "core", "data")

CWE_TAG = re.compile(r"^external/cwe/cwe-0*(\d+)$", re.IGNORECASE)
SURFACES = ["Tool", "Resource", "Prompt", "Protocol"]


def load_two_column(path, key_field, value_field):
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out[row[key_field]] = row[value_field]
    return out


def sarif_findings(path):
    with open(path) as fh:
        doc = json.load(fh)
    found, skipped = [], 0
    for run in doc.get("runs", []):
        rules = run.get("tool", {}).get("driver", {}).get("rules", [])
        by_id = {r.get("id"): r for r in rules}
        for result in run.get("results", []):
            rule = by_id.get(result.get("ruleId"), {})
            cwe = None
            for tag in rule.get("properties", {}).get("tags", []):
                m = CWE_TAG.match(tag)
                if m:
                    cwe = int(m.group(1))
                    break
            loc = result.get("locations", [{}])[0].get("physicalLocation", {})
            uri = loc.get("artifactLocation", {}).get("uri")
            line = loc.get("region", {}).get("startLine", 1)
            if uri is None or cwe is None:
                skipped += 1
                continue
            found.append((cwe, uri, line))
    return found, skipped


def joern_findings(path, manifest):
    found, skipped = [], 0
    with open(path) as fh:
        for line in fh:
            rec = json.loads(line)
            cwe = manifest.get(rec["query_id"])
            if cwe is None:
                skipped += 1
                continue
            found.append((int(cwe), rec["filename"], rec["line_number"]))
    return found, skipped


def scanner_findings(path, category_map):
    with open(path) as fh:
        doc = json.load(fh)
    found, skipped = [], 0
    for entry in doc.get("findings", []):
        cwe = category_map.get(entry["category"])
        if cwe is None:
            skipped += 1
            continue
        found.append((int(cwe), entry["file"], 1))
    return found, skipped


def collect_profiles():
    manifest = load_two_column(os.path.join(CORPUS, "joern_manifest.csv"), "query_id", "cwe_id")
    category_map = load_two_column(os.path.join(DATA, "scanner_map.csv"), "category", "cwe_id")
    profiles = {}
    for repo in sorted(os.listdir(CORPUS)):
        repo_dir = os.path.join(CORPUS, repo)
        if not os.path.isdir(repo_dir):
            continue
        keys, skipped = set(), 0
        for name in sorted(os.listdir(repo_dir)):
            path = os.path.join(repo_dir, name)
            if name.endswith(".sarif"):
                found, s = sarif_findings(path)
            elif name.endswith(".jsonl"):
                found, s = joern_findings(path, manifest)
            elif name.endswith(".scan.json"):
                found, s = scanner_findings(path, category_map)
            else:
                continue
            skipped += s
            for cwe, uri, line in found:
                keys.add((cwe, uri, line - line % 5))
        freq = {}
        for cwe, _, _ in keys:
            freq[cwe] = freq.get(cwe, 0) + 1
        profiles[repo] = {"freq": freq, "skipped": skipped}
    return profiles


def score(profiles, indices):
    rows = {}
    for repo, p in profiles.items():
        n = sum(p["freq"].values())
        if n == 0:
            rows[repo] = None
            continue
        exp = sum(f * indices[c][1] for c, f in p["freq"].items())
        rms = math.sqrt(sum(f * indices[c][1] ** 2 for c, f in p["freq"].items()) / n)
        overall = rms * math.log10(n + 1)
        rows[repo] = {"n": n, "exp": exp, "rms": rms, "overall": overall}
    scored = {r: v for r, v in rows.items() if v is not None}
    lns = {r: math.log(v["overall"]) for r, v in scored.items()}
    lo, hi = min(lns.values()), max(lns.values())
    for repo, v in scored.items():
        v["norm"] = 0.0 if hi == lo else 100.0 * (lns[repo] - lo) / (hi - lo)
        n = v["norm"]
        v["band"] = ("VeryLow" if n < 20 else "Low" if n < 40 else "Medium"
                     if n < 60 else "High" if n < 80 else "VeryHigh")
    return rows


def surface_of(cwe, surface_map):
    return surface_map.get(cwe, "Unmapped")


def main():
    cwes = oracle.parse_cwe(os.path.join(ROOT, "fixtures", "catalogs", "cwec_v4.19.1.xml"))
    capecs = oracle.parse_capec(os.path.join(ROOT, "fixtures", "catalogs", "capec_v3.9.xml"))
    overrides = oracle.load_overrides(os.path.join(DATA, "overrides.csv"))
    pairs = oracle.apply_overrides(oracle.build_pairs(cwes, capecs), overrides, cwes, capecs)
    indices = oracle.risk_indices(pairs)
    surface_map = {int(k): v for k, v in
                   load_two_column(os.path.join(DATA, "surface_map.csv"), "cwe_id", "surface").items()}

    profiles = collect_profiles()
    rows = score(profiles, indices)

    os.makedirs(GOLDEN, exist_ok=True)
    with open(os.path.join(GOLDEN, "repo_scores.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["repo_id", "n_findings", "exposure", "rms", "overall", "normalized", "band"])
        for repo in sorted(rows):
            v = rows[repo]
            if v is None:
                w.writerow([repo, 0, repr(0.0), "", "", "", "Unscored"])
            else:
                w.writerow([repo, v["n"], repr(v["exp"]), repr(v["rms"]),
                            repr(v["overall"]), repr(v["norm"]), v["band"]])

    # corpus-wide shares of findings and exposure per surface
    f_tot, e_tot = {}, {}
    for p in profiles.values():
        for c, f in p["freq"].items():
            s = surface_of(c, surface_map)
            f_tot[s] = f_tot.get(s, 0) + f
            e_tot[s] = e_tot.get(s, 0.0) + f * indices[c][1]
    fn, en = sum(f_tot.values()), sum(e_tot.values())
    with open(os.path.join(GOLDEN, "surface_shares.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["surface", "finding_share", "exposure_share"])
        for s in SURFACES + ["Unmapped"]:
            w.writerow([s, repr(100.0 * f_tot.get(s, 0) / fn), repr(100.0 * e_tot.get(s, 0.0) / en)])

    # conditional co-occurrence over the four named surfaces
    has = {repo: {surface_of(c, surface_map) for c in p["freq"]} for repo, p in profiles.items()}
    with open(os.path.join(GOLDEN, "cooccurrence.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["surface"] + SURFACES)
        for a in SURFACES:
            support = [r for r in has if a in has[r]]
            row = [a]
            for b in SURFACES:
                if not support:
                    row.append("")
                else:
                    row.append(repr(100.0 * sum(1 for r in support if b in has[r]) / len(support)))
            w.writerow(row)

    for repo in sorted(profiles):
        p, v = profiles[repo], rows[repo]
        desc = "unscored" if v is None else f"n={v['n']} norm={v['norm']:.2f} band={v['band']}"
        print(f"{repo}: freq={dict(sorted(p['freq'].items()))} skipped={p['skipped']} {desc}")


if __name__ == "__main__":
    main()
