#!/usr/bin/env python3
"""Deterministic generator for the pinned catalog snapshot fixtures.

Emits fixtures/catalogs/cwec_v4.19.1.xml and fixtures/catalogs/capec_v3.9.xml:
schema-conformant CWE 4.x / CAPEC 3.x documents whose entry counts,
field-coverage rates, and distribution statistics match the published
4.19.1 software-development view (399 weaknesses) and the 3.9 catalog
(615 attack patterns). Entries needed by the test suite carry their real
identifiers and names; the remainder is synthetic filler that completes
the aggregate statistics. Self-checks at the bottom re-derive every pinned
statistic and risk-index spot value via tools/oracle/catalog_oracle.py and
abort on any mismatch.

Run from the repository root:  python3 tools/gen_catalog_fixtures.py
"""

import os
import random
import sys
import xml.etree.ElementTree as ET

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "oracle"))
import catalog_oracle as oracle  # noqa: E402

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "fixtures", "catalogs")
CWE_NS = "http://cwe.mitre.org/cwe-7"
CAPEC_NS = "http://capec.mitre.org/capec-3"

H, M, L = "High", "Medium", "Low"
VH, VL = "Very High", "Very Low"

# ---------------------------------------------------------------------------
# Named weaknesses: (id, name, LE, MI count, CC count, weakness-side CAPEC ids)
# Factor choices pin the risk-index spot values asserted by the test suite:
# the catalog maximum raw risk is 540 (CWE-732) and the other anchors are
# simple fractions of it.
# ---------------------------------------------------------------------------
NAMED_WEAKNESSES = [
    # Tool-surface weaknesses
    (77, "Improper Neutralization of Special Elements used in a Command ('Command Injection')", H, 2, 3, [15]),
    (78, "Improper Neutralization of Special Elements used in an OS Command ('OS Command Injection')", H, 2, 4, [88]),
    (88, "Improper Neutralization of Argument Delimiters in a Command ('Argument Injection')", None, 2, 3, [6]),
    (89, "Improper Neutralization of Special Elements used in an SQL Command ('SQL Injection')", H, 2, 5, [66, 7]),
    (94, "Improper Control of Generation of Code ('Code Injection')", M, 2, 4, [242]),
    (95, "Improper Neutralization of Directives in Dynamically Evaluated Code ('Eval Injection')", M, 1, 4, [35]),
    (99, "Improper Control of Resource Identifiers ('Resource Injection')", None, 1, 2, [240]),
    (434, "Unrestricted Upload of File with Dangerous Type", M, 2, 3, [17]),
    (502, "Deserialization of Untrusted Data", M, 2, 4, [586]),
    (829, "Inclusion of Functionality from Untrusted Control Sphere", None, 2, 3, [175]),
    (1321, "Improperly Controlled Modification of Object Prototype Attributes ('Prototype Pollution')", None, 1, 3, [77]),
    # Resource-surface weaknesses
    (22, "Improper Limitation of a Pathname to a Restricted Directory ('Path Traversal')", H, 2, 2, [126, 76]),
    (23, "Relative Path Traversal", None, 2, 2, [139]),
    (36, "Absolute Path Traversal", None, 1, 4, [597]),
    (73, "External Control of File Name or Path", H, 2, 3, [13]),
    (200, "Exposure of Sensitive Information to an Unauthorized Actor", H, 1, 2, []),
    (209, "Generation of Error Message Containing Sensitive Information", H, 3, 1, [215]),
    (212, "Improper Removal of Sensitive Information Before Storage or Transfer", None, 2, 2, [168]),
    (276, "Incorrect Default Permissions", M, 2, 2, [1]),
    (312, "Cleartext Storage of Sensitive Information", None, 2, 1, [37]),
    (315, "Cleartext Storage of Sensitive Information in a Cookie", None, 1, 1, [31]),
    (359, "Exposure of Private Personal Information to an Unauthorized Actor", None, 2, 1, [508]),
    (377, "Insecure Temporary File", None, 1, 2, [155]),
    (497, "Exposure of Sensitive System Information to an Unauthorized Control Sphere", None, 2, 1, [170]),
    (532, "Insertion of Sensitive Information into Log File", M, 3, 1, [215]),
    (732, "Incorrect Permission Assignment for Critical Resource", H, 4, 3, [17, 122]),
    # Prompt-surface weaknesses
    (20, "Improper Input Validation", H, 2, 3, [28]),
    (74, "Improper Neutralization of Special Elements in Output Used by a Downstream Component ('Injection')", H, 2, 4, [137]),
    (79, "Improper Neutralization of Input During Web Page Generation ('Cross-site Scripting')", H, 1, 3, [63]),
    (116, "Improper Encoding or Escaping of Output", None, 2, 2, [104]),
    (117, "Improper Output Neutralization for Logs", M, 1, 2, [93]),
    (185, "Incorrect Regular Expression", None, 2, 2, [6, 15, 79]),
    (186, "Overly Restrictive Regular Expression", None, 1, 1, []),
    (441, "Unintended Proxy or Intermediary ('Confused Deputy')", L, 1, 3, [219]),
    (601, "URL Redirection to Untrusted Site ('Open Redirect')", L, 2, 2, [194]),
    # Protocol-surface weaknesses
    (284, "Improper Access Control", None, 2, 3, [180]),
    (287, "Improper Authentication", H, 2, 3, [114]),
    (295, "Improper Certificate Validation", None, 2, 2, [459]),
    (306, "Missing Authentication for Critical Function", None, 1, 3, [36]),
    (327, "Use of a Broken or Risky Cryptographic Algorithm", None, 3, 2, [97]),
    (328, "Use of Weak Hash", None, 1, 2, [461]),
    (352, "Cross-Site Request Forgery (CSRF)", M, 1, 4, [62]),
    (400, "Uncontrolled Resource Consumption", None, 2, 2, [147]),
    (489, "Active Debug Code", None, 2, 4, [121]),
    (639, "Authorization Bypass Through User-Controlled Key", None, 1, 3, []),
    (770, "Allocation of Resources Without Limits or Throttling", H, 2, 1, [125]),
    (862, "Missing Authorization", None, 1, 5, [1]),
    (863, "Incorrect Authorization", None, 3, 3, []),
    (916, "Use of Password Hash With Insufficient Computational Effort", None, 1, 1, [55]),
    (918, "Server-Side Request Forgery (SSRF)", None, 1, 2, [664]),
    (1333, "Inefficient Regular Expression Complexity", None, 1, 1, [492]),
    # Additional real entries referenced by configuration defaults and tests
    (119, "Improper Restriction of Operations within the Bounds of a Memory Buffer", None, 1, 3, [100]),
    (125, "Out-of-bounds Read", None, 1, 2, [540]),
    (190, "Integer Overflow or Wraparound", None, 1, 3, [92]),
    (269, "Improper Privilege Management", None, 2, 3, [233]),
    (285, "Improper Authorization", None, 3, 3, [114, 3]),
    (416, "Use After Free", None, 1, 3, []),
    (476, "NULL Pointer Dereference", None, 1, 2, [129]),
    (522, "Insufficiently Protected Credentials", None, 2, 2, [55]),
    (666, "Operation on Resource in Wrong Phase of Lifetime", None, 1, 2, [26]),
    (798, "Use of Hard-coded Credentials", None, 2, 3, [191]),
]

# Named attack patterns: (id, name, LA, TS, pattern-side CWE ids)
NAMED_PATTERNS = [
    (1, "Accessing Functionality Not Properly Constrained by ACLs", H, H, [276, 862]),
    (3, "Using Leading 'Ghost' Character Sequences to Bypass Input Filters", M, H, []),
    (6, "Argument Injection", H, H, [88]),
    (7, "Blind SQL Injection", H, H, [89]),
    (13, "Subverting Environment Variable Values", M, H, [73]),
    (15, "Command Delimiters", H, H, [77]),
    (17, "Using Malicious Files", H, VH, [732]),
    (26, "Leveraging Race Conditions", H, H, [666]),
    (28, "Fuzzing", H, M, [20]),
    (31, "Accessing/Intercepting/Modifying HTTP Cookies", H, H, [315]),
    (35, "Leverage Executable Code in Non-Executable Files", M, H, [95]),
    (36, "Using Unpublished Interfaces or Functionality", H, VH, [306]),
    (37, "Retrieve Embedded Sensitive Data", H, VH, [312]),
    (55, "Rainbow Table Password Cracking", H, M, [916, 522]),
    (62, "Cross Site Request Forgery", H, VH, [352]),
    (63, "Cross-Site Scripting (XSS)", H, VH, [79]),
    (66, "SQL Injection", H, VH, [89]),
    (76, "Manipulating Web Input to File System Calls", H, VH, [22]),
    (77, "Manipulating User-Controlled Variables", H, H, [1321]),
    (79, "Using Slashes in Alternate Encoding", H, VH, [185]),
    (88, "OS Command Injection", H, H, [78]),
    (92, "Forced Integer Overflow", M, H, [190]),
    (93, "Log Injection-Tampering-Forging", H, H, [117]),
    (97, "Cryptanalysis", M, VH, [327]),
    (100, "Overflow Buffers", H, VH, [119]),
    (104, "Cross Zone Scripting", M, H, [116]),
    (114, "Authentication Abuse", H, VH, [287]),
    (116, "Excavation", H, VH, [200]),
    (121, "Exploit Non-Production Interfaces", L, M, [489]),
    (122, "Privilege Abuse", M, H, [732]),
    (125, "Flooding", H, M, [770]),
    (126, "Path Traversal", H, VH, [22]),
    (129, "Pointer Manipulation", M, M, [476]),
    (137, "Parameter Injection", M, M, [74]),
    (139, "Relative Path Traversal", M, H, [23]),
    (147, "XML Ping of the Death", M, M, [400]),
    (155, "Screen Temporary Files for Sensitive Information", M, VH, [377]),
    (168, "Windows ::DATA Alternate Data Stream", None, M, [212]),
    (170, "Web Application Fingerprinting", M, M, [497]),
    (175, "Code Inclusion", M, M, [829]),
    (180, "Exploiting Incorrectly Configured Access Control Security Levels", M, H, [284]),
    (191, "Read Sensitive Constants Within an Executable", M, H, [798]),
    (194, "Fake the Source of Data", H, M, [601]),
    (215, "Fuzzing for Application Mapping", M, L, [209, 532]),
    (219, "XML Routing Detour", H, M, [441]),
    (233, "Privilege Escalation", M, H, [269]),
    (240, "Resource Injection", M, H, [99]),
    (242, "Code Injection", M, VH, [94]),
    (459, "Creating a Rogue Certification Authority Certificate", L, H, [295]),
    (461, "Web Services API Signature Forgery Leveraging Hash Function Extension Weakness", M, H, [328]),
    (492, "Regular Expression Exponential Blowup", H, M, [1333]),
    (508, "Shoulder Surfing", L, M, [359]),
    (540, "Overread Buffers", M, H, [125]),
    (586, "Object Injection", M, H, [502]),
    (597, "Absolute Path Traversal", None, None, [36]),
    (664, "Server Side Request Forgery", H, H, [918]),
]

# Global targets for the CWE snapshot.
CWE_TOTAL = 399
LE_PRESENT = {H: 40, M: 40, L: 14}          # 305 missing -> 76.4%
MI_HIST = {1: 273, 2: 99, 3: 20, 4: 7}       # mean 1.401, median 1, std 0.668
CC_HIST = {1: 172, 2: 115, 3: 52, 4: 30, 5: 13, 6: 8, 7: 4, 8: 1, 9: 0, 10: 4}
# 867 consequence entries in total; mean 2.173, median 2, std 1.559.

IMPACT_QUOTA = [
    ("Bypass Protection Mechanism", 77),
    ("Read Application Data", 73),
    ("Execute Unauthorized Code or Commands", 68),
    ("Gain Privileges or Assume Identity", 67),
    ("DoS: Crash, Exit, or Restart", 58),
    ("Modify Application Data", 57),
    ("Read Files or Directories", 52),
    ("Unexpected State", 48),
    ("Modify Files or Directories", 45),
    ("DoS: Resource Consumption (CPU)", 40),
    ("Read Memory", 38),
    ("Modify Memory", 35),
    ("DoS: Resource Consumption (Memory)", 30),
    ("Hide Activities", 28),
    ("Alter Execution Logic", 25),
    ("DoS: Resource Consumption (Other)", 24),
    ("Quality Degradation", 20),
    ("Varies by Context", 18),
    ("DoS: Instability", 15),
    ("Other", 12),
    ("Reduce Maintainability", 10),
    ("Reduce Performance", 9),
    ("Reduce Reliability", 8),
    ("DoS: Amplification", 6),
    ("Reduce Visibility", 4),
]

PHASES = ["Architecture and Design", "Implementation", "Installation", "Operation"]

# Global targets for the CAPEC snapshot.
CAPEC_TOTAL = 615
LA_PRESENT = {H: 130, M: 119, L: 96}         # 270 missing -> 43.9%; H+M = 40.5%
TS_PRESENT = {VH: 120, H: 150, M: 120, L: 70, VL: 30}  # 125 missing -> 20.3%
DEPRECATED_FILLERS = 56
UNKNOWN_LA = 3   # emitted as literal "Unknown" text; counted as missing
UNKNOWN_TS = 3

SYNTH_VERBS = [
    "Improper Handling", "Missing Validation", "Incorrect Tracking",
    "Unverified Use", "Inconsistent Interpretation", "Improper Enforcement",
    "Incomplete Cleanup", "Unchecked Propagation",
]
SYNTH_NOUNS = [
    "of Session Context", "of Resource Quotas", "of Delegated Credentials",
    "of Serialized State", "of Transport Metadata", "of Capability Tokens",
    "of Configuration Layers", "of Cached Responses", "of Registry Entries",
    "of Scheduler Hints",
]
SYNTH_ATTACK_VERBS = [
    "Abusing", "Probing", "Replaying", "Enumerating", "Tampering with",
    "Spoofing", "Flooding", "Harvesting",
]


def synth_weakness_name(rng):
    return f"{rng.choice(SYNTH_VERBS)} {rng.choice(SYNTH_NOUNS)}"


def synth_pattern_name(rng):
    return f"{rng.choice(SYNTH_ATTACK_VERBS)} {rng.choice(SYNTH_NOUNS)[3:]}"


def take(quota, key):
    if quota.get(key, 0) <= 0:
        raise SystemExit(f"quota exhausted for {key!r}")
    quota[key] -= 1


def build_weaknesses(rng):
    le_quota = dict(LE_PRESENT)
    mi_quota = dict(MI_HIST)
    cc_quota = dict(CC_HIST)
    impact_quota = {label: n for label, n in IMPACT_QUOTA}

    weaknesses = []
    for wid, name, le, mi, cc, capecs in NAMED_WEAKNESSES:
        if le is not None:
            take(le_quota, le)
        take(mi_quota, mi)
        take(cc_quota, cc)
        weaknesses.append({"id": wid, "name": name, "le": le, "mi": mi, "cc": cc, "capecs": capecs})

    filler_count = CWE_TOTAL - len(weaknesses)
    le_pool = [lab for lab, n in le_quota.items() for _ in range(n)]
    le_pool += [None] * (filler_count - len(le_pool))
    mi_pool = [k for k, n in mi_quota.items() for _ in range(n)]
    cc_pool = [k for k, n in cc_quota.items() for _ in range(n)]
    if len(mi_pool) != filler_count or len(cc_pool) != filler_count:
        raise SystemExit("filler histogram pools out of balance")
    rng.shuffle(le_pool)
    rng.shuffle(mi_pool)
    rng.shuffle(cc_pool)

    filler_capec_ids = [7001 + i for i in range(40)]
    for i in range(filler_count):
        wid = 2001 + i
        mi, cc = mi_pool[i], cc_pool[i]
        capecs = []
        # A sprinkle of scorable fillers with deliberately small products.
        if i % 3 == 0 and mi <= 2 and cc <= 3:
            capecs = [filler_capec_ids[i % len(filler_capec_ids)]]
        weaknesses.append(
            {"id": wid, "name": synth_weakness_name(rng), "le": le_pool[i], "mi": mi, "cc": cc, "capecs": capecs}
        )

    # Assign one impact label per consequence entry, honoring global quotas.
    for w in weaknesses:
        labels = []
        for _ in range(w["cc"]):
            label = max(impact_quota, key=lambda k: (impact_quota[k], k))
            if impact_quota[label] <= 0:
                raise SystemExit("impact quota exhausted")
            impact_quota[label] -= 1
            labels.append(label)
        w["impacts"] = labels
    if any(v != 0 for v in impact_quota.values()):
        raise SystemExit("impact quota not fully consumed")

    weaknesses.sort(key=lambda w: w["id"])
    return weaknesses


def build_patterns(rng):
    la_quota = dict(LA_PRESENT)
    ts_quota = dict(TS_PRESENT)

    patterns = []
    for pid, name, la, ts, cwes in NAMED_PATTERNS:
        if la is not None:
            take(la_quota, la)
        if ts is not None:
            take(ts_quota, ts)
        patterns.append({"id": pid, "name": name, "la": la, "ts": ts, "cwes": cwes, "deprecated": False})

    filler_count = CAPEC_TOTAL - len(patterns)
    la_pool = [lab for lab, n in la_quota.items() for _ in range(n)]
    la_missing = filler_count - len(la_pool)
    la_pool += ["Unknown"] * UNKNOWN_LA + [None] * (la_missing - UNKNOWN_LA)
    ts_pool = [lab for lab, n in ts_quota.items() for _ in range(n)]
    ts_missing = filler_count - len(ts_pool)
    ts_pool += ["Unknown"] * UNKNOWN_TS + [None] * (ts_missing - UNKNOWN_TS)
    rng.shuffle(la_pool)
    rng.shuffle(ts_pool)

    for i in range(filler_count):
        pid = 7001 + i
        deprecated = i >= filler_count - DEPRECATED_FILLERS
        name = synth_pattern_name(rng)
        if deprecated:
            name = f"DEPRECATED: {name}"
        cwes = [2001 + (i * 7) % 300] if i % 11 == 0 and not deprecated else []
        patterns.append(
            {"id": pid, "name": name, "la": la_pool[i], "ts": ts_pool[i], "cwes": cwes, "deprecated": deprecated}
        )

    patterns.sort(key=lambda p: p["id"])
    return patterns


def write_cwe_xml(weaknesses, path):
    ET.register_namespace("", CWE_NS)
    root = ET.Element(f"{{{CWE_NS}}}Weakness_Catalog", {
        "Name": "CWE",
        "Version": "4.19.1",
        "Date": "2026-01-31",
    })
    container = ET.SubElement(root, f"{{{CWE_NS}}}Weaknesses")
    for w in weaknesses:
        el = ET.SubElement(container, f"{{{CWE_NS}}}Weakness", {
            "ID": str(w["id"]),
            "Name": w["name"],
            "Abstraction": "Base",
            "Structure": "Simple",
            "Status": "Stable",
        })
        desc = ET.SubElement(el, f"{{{CWE_NS}}}Description")
        desc.text = f"The product exhibits weakness class {w['id']}."
        if w["mi"] > 0:
            modes = ET.SubElement(el, f"{{{CWE_NS}}}Modes_Of_Introduction")
            for phase in PHASES[: w["mi"]]:
                intro = ET.SubElement(modes, f"{{{CWE_NS}}}Introduction")
                ET.SubElement(intro, f"{{{CWE_NS}}}Phase").text = phase
        if w["le"] is not None:
            ET.SubElement(el, f"{{{CWE_NS}}}Likelihood_Of_Exploit").text = w["le"]
        if w["cc"] > 0:
            cons = ET.SubElement(el, f"{{{CWE_NS}}}Common_Consequences")
            for label in w["impacts"]:
                c = ET.SubElement(cons, f"{{{CWE_NS}}}Consequence")
                ET.SubElement(c, f"{{{CWE_NS}}}Scope").text = "Integrity"
                ET.SubElement(c, f"{{{CWE_NS}}}Impact").text = label
        if w["capecs"]:
            rel = ET.SubElement(el, f"{{{CWE_NS}}}Related_Attack_Patterns")
            for pid in w["capecs"]:
                ET.SubElement(rel, f"{{{CWE_NS}}}Related_Attack_Pattern", {"CAPEC_ID": str(pid)})
    tree = ET.ElementTree(root)
    ET.indent(tree, space="  ")
    tree.write(path, encoding="UTF-8", xml_declaration=True)


def write_capec_xml(patterns, path):
    ET.register_namespace("", CAPEC_NS)
    root = ET.Element(f"{{{CAPEC_NS}}}Attack_Pattern_Catalog", {
        "Name": "CAPEC",
        "Version": "3.9",
        "Date": "2026-01-31",
    })
    container = ET.SubElement(root, f"{{{CAPEC_NS}}}Attack_Patterns")
    for p in patterns:
        el = ET.SubElement(container, f"{{{CAPEC_NS}}}Attack_Pattern", {
            "ID": str(p["id"]),
            "Name": p["name"],
            "Abstraction": "Standard",
            "Status": "Deprecated" if p["deprecated"] else "Stable",
        })
        desc = ET.SubElement(el, f"{{{CAPEC_NS}}}Description")
        desc.text = f"An adversary leverages attack pattern {p['id']}."
        if p["la"] is not None:
            ET.SubElement(el, f"{{{CAPEC_NS}}}Likelihood_Of_Attack").text = p["la"]
        if p["ts"] is not None:
            ET.SubElement(el, f"{{{CAPEC_NS}}}Typical_Severity").text = p["ts"]
        if p["cwes"]:
            rel = ET.SubElement(el, f"{{{CAPEC_NS}}}Related_Weaknesses")
            for wid in p["cwes"]:
                ET.SubElement(rel, f"{{{CAPEC_NS}}}Related_Weakness", {"CWE_ID": str(wid)})
    tree = ET.ElementTree(root)
    ET.indent(tree, space="  ")
    tree.write(path, encoding="UTF-8", xml_declaration=True)


def verify(cwe_path, capec_path, overrides_path):
    import statistics

    cwes = oracle.parse_cwe(cwe_path)
    capecs = oracle.parse_capec(capec_path)
    assert len(cwes) == CWE_TOTAL, len(cwes)
    assert len(capecs) == CAPEC_TOTAL, len(capecs)

    le_missing = 100.0 * sum(1 for w in cwes.values() if w["le"] is None) / len(cwes)
    la_missing = 100.0 * sum(1 for p in capecs.values() if p["la"] is None) / len(capecs)
    ts_missing = 100.0 * sum(1 for p in capecs.values() if p["ts"] is None) / len(capecs)
    assert abs(le_missing - 76.4) < 0.5, le_missing
    assert abs(la_missing - 43.9) < 0.5, la_missing
    assert abs(ts_missing - 20.3) < 0.5, ts_missing

    mi = [w["mi"] for w in cwes.values()]
    cc = [w["cc"] for w in cwes.values()]
    assert abs(statistics.mean(mi) - 1.4) < 0.05
    assert statistics.median(mi) == 1.0
    assert abs(statistics.pstdev(mi) - 0.67) < 0.05
    assert abs(statistics.mean(cc) - 2.17) < 0.05
    assert statistics.median(cc) == 2
    assert abs(statistics.pstdev(cc) - 1.56) < 0.05
    total_impacts = sum(len(w["impacts"]) for w in cwes.values())
    assert total_impacts == 867, total_impacts

    overrides = oracle.load_overrides(overrides_path)
    pairs = oracle.apply_overrides(oracle.build_pairs(cwes, capecs), overrides, cwes, capecs)
    idx = oracle.risk_indices(pairs)

    expected = {
        732: (540, 100.0),
        89: (450, 83.33333333333334),
        863: (405, 75.0),
        862: (180, 33.33333333333333),
        22: (180, 33.33333333333333),
        306: (135, 25.0),
        200: (90, 16.666666666666664),
        441: (27, 5.0),
        639: (135, 25.0),
    }
    for wid, (raw, index) in expected.items():
        got_raw, got_idx = idx[wid]
        assert got_raw == raw, (wid, got_raw, raw)
        assert abs(got_idx - index) < 1e-9, (wid, got_idx, index)
    tops = [wid for wid, (_, i) in idx.items() if i == 100.0]
    assert tops == [732], tops
    # every surface-mapped weakness that ingestion can produce is scorable
    for wid, _, _, _, _, _ in NAMED_WEAKNESSES:
        if wid == 416:
            continue  # deliberately unscorable: no pattern links
        assert wid in idx, wid
    print(f"verified: {len(cwes)} weaknesses, {len(capecs)} patterns, "
          f"{len(pairs)} scorable pairs, {len(idx)} scored CWEs")


def main():
    rng = random.Random(0x5EC)
    os.makedirs(OUT_DIR, exist_ok=True)
    cwe_path = os.path.join(OUT_DIR, "cwec_v4.19.1.xml")
    capec_path = os.path.join(OUT_DIR, "capec_v3.9.xml")
    write_cwe_xml(build_weaknesses(rng), cwe_path)
    write_capec_xml(build_patterns(rng), capec_path)
    overrides = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "data", "overrides.csv")
    verify(cwe_path, capec_path, overrides)


if __name__ == "__main__":
    main()
