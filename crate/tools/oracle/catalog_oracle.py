#!/usr/bin/env python3
"""Independent reference computation of per-CWE risk indices.

Parses the CWE/CAPEC catalog XML snapshots and an override table with plain
ElementTree + csv, applies the pairwise likelihood imputation and manual
overrides, and emits the per-CWE raw risk and 0-100 risk index. Used to
precompute golden expectations for the test suite; deliberately kept separate
from the production implementation.
"""

import csv
import sys
import xml.etree.ElementTree as ET

LIKELIHOOD = {"Low": 1, "Medium": 2, "High": 3}
SEVERITY = {"Very Low": 1, "Low": 2, "Medium": 3, "High": 4, "Very High": 5}


def _local(tag):
    return tag.split("}", 1)[-1]


def parse_cwe(path):
    """Returns {cwe_id: {name, le, mi, cc, capecs}} over all Weakness elements."""
    tree = ET.parse(path)
    out = {}
    for el in tree.iter():
        if _local(el.tag) != "Weakness":
            continue
        wid = int(el.get("ID"))
        rec = {
            "name": el.get("Name"),
            "le": None,
            "mi": 0,
            "cc": 0,
            "capecs": [],
            "impacts": [],
        }
        for child in el:
            tag = _local(child.tag)
            if tag == "Likelihood_Of_Exploit":
                rec["le"] = LIKELIHOOD.get((child.text or "").strip())
            elif tag == "Modes_Of_Introduction":
                rec["mi"] = sum(1 for c in child if _local(c.tag) == "Introduction")
            elif tag == "Common_Consequences":
                for cons in child:
                    if _local(cons.tag) != "Consequence":
                        continue
                    rec["cc"] += 1
                    for part in cons:
                        if _local(part.tag) == "Impact":
                            rec["impacts"].append((part.text or "").strip())
            elif tag == "Related_Attack_Patterns":
                for rap in child:
                    if _local(rap.tag) == "Related_Attack_Pattern":
                        rec["capecs"].append(int(rap.get("CAPEC_ID")))
        if wid in out:
            raise SystemExit(f"duplicate CWE id {wid}")
        out[wid] = rec
    return out


def parse_capec(path):
    """Returns {capec_id: {name, la, ts, cwes}} over all Attack_Pattern elements."""
    tree = ET.parse(path)
    out = {}
    for el in tree.iter():
        if _local(el.tag) != "Attack_Pattern":
            continue
        pid = int(el.get("ID"))
        rec = {"name": el.get("Name"), "la": None, "ts": None, "cwes": []}
        for child in el:
            tag = _local(child.tag)
            if tag == "Likelihood_Of_Attack":
                rec["la"] = LIKELIHOOD.get((child.text or "").strip())
            elif tag == "Typical_Severity":
                rec["ts"] = SEVERITY.get((child.text or "").strip())
            elif tag == "Related_Weaknesses":
                for rw in child:
                    if _local(rw.tag) == "Related_Weakness":
                        rec["cwes"].append(int(rw.get("CWE_ID")))
        if pid in out:
            raise SystemExit(f"duplicate CAPEC id {pid}")
        out[pid] = rec
    return out


def load_overrides(path):
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                {
                    "cwe_id": int(row["cwe_id"]),
                    "le": int(row["le"]) if row["le"] else None,
                    "la": int(row["la"]) if row["la"] else None,
                    "mi": int(row["mi"]) if row["mi"] else None,
                    "cc": int(row["cc"]) if row["cc"] else None,
                    "ts": int(row["ts"]) if row["ts"] else None,
                    "capec_ids": [int(x) for x in row["capec_ids"].split(";") if x],
                }
            )
    return rows


def build_pairs(cwes, capecs):
    """Linked pairs after pairwise LE/LA imputation; unresolvable pairs dropped."""
    links = set()
    for wid, rec in cwes.items():
        for pid in rec["capecs"]:
            if pid in capecs:
                links.add((wid, pid))
    for pid, rec in capecs.items():
        for wid in rec["cwes"]:
            if wid in cwes:
                links.add((wid, pid))
    pairs = []
    for wid, pid in sorted(links):
        w, p = cwes[wid], capecs[pid]
        le, la, ts = w["le"], p["la"], p["ts"]
        if le is None and la is None:
            continue
        le = le if le is not None else la
        la = la if la is not None else w["le"]
        if ts is None or w["mi"] == 0 or w["cc"] == 0:
            continue
        pairs.append(
            {"cwe": wid, "capec": pid, "le": le, "la": la, "mi": w["mi"], "cc": w["cc"], "ts": ts}
        )
    return pairs


def apply_overrides(pairs, overrides, cwes, capecs):
    overridden = {o["cwe_id"] for o in overrides}
    out = [p for p in pairs if p["cwe"] not in overridden]
    for o in overrides:
        wid = o["cwe_id"]
        if wid not in cwes:
            raise SystemExit(f"override for unknown CWE {wid}")
        w = cwes[wid]
        targets = o["capec_ids"] or [None]
        for pid in targets:
            p = capecs.get(pid, {"la": None, "ts": None}) if pid is not None else {"la": None, "ts": None}
            la = o["la"] if o["la"] is not None else p["la"]
            le = o["le"] if o["le"] is not None else w["le"]
            if le is None:
                le = la
            if la is None:
                la = le
            mi = o["mi"] if o["mi"] is not None else w["mi"]
            cc = o["cc"] if o["cc"] is not None else w["cc"]
            ts = o["ts"] if o["ts"] is not None else p["ts"]
            if None in (le, la, ts) or mi == 0 or cc == 0:
                raise SystemExit(f"override for CWE {wid} leaves factors unresolved")
            out.append({"cwe": wid, "capec": pid, "le": le, "la": la, "mi": mi, "cc": cc, "ts": ts})
    return out


def risk_indices(pairs):
    """Per-CWE max pair raw risk, scaled so the catalog max maps to 100."""
    raw = {}
    for p in pairs:
        r = p["la"] * p["le"] * p["mi"] * p["ts"] * p["cc"]
        raw[p["cwe"]] = max(raw.get(p["cwe"], 0), r)
    top = max(raw.values())
    return {wid: (r, 100.0 * r / top) for wid, r in sorted(raw.items())}


def main():
    if len(sys.argv) != 4:
        raise SystemExit("usage: catalog_oracle.py CWE_XML CAPEC_XML OVERRIDES_CSV")
    cwes = parse_cwe(sys.argv[1])
    capecs = parse_capec(sys.argv[2])
    overrides = load_overrides(sys.argv[3])
    pairs = apply_overrides(build_pairs(cwes, capecs), overrides, cwes, capecs)
    writer = csv.writer(sys.stdout)
    writer.writerow(["cwe_id", "raw_risk", "risk_index"])
    for wid, (raw, idx) in risk_indices(pairs).items():
        writer.writerow([wid, raw, repr(idx)])


if __name__ == "__main__":
    main()
