#!/usr/bin/env python3
"""Runs every subcommand, validates its JSON against docs/schemas and checks exit codes."""
import json
import os
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

prlab, schemas = sys.argv[1], Path(sys.argv[2])
failures = []


def run(args, expect=0, env=None):
    p = subprocess.run([prlab, *args], capture_output=True, text=True, env=env)
    if p.returncode != expect:
        failures.append(f"{' '.join(args)}: exit {p.returncode}, want {expect}\n{p.stderr}")
    return p


def validate(name, path):
    doc = json.loads(Path(path).read_text())
    schema = json.loads((schemas / f"{name}.schema.json").read_text())
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as e:
        failures.append(f"{name}: {e.message} at {list(e.absolute_path)}")
    return doc


with tempfile.TemporaryDirectory() as tmp:
    t = Path(tmp)
    lam = str(t / "lam.prseq")
    cases = {
        "sieve": ["sieve", "--kind", "liouville", "--range", "1:20001", "--out", lam],
        "correlate": ["correlate", "--seq", lam, "--test", "pm(n % 2 == 0)", "--p", "0.25",
                      "--martingale", "repeat-last:1/2"],
        "battery": ["battery", "--seq", lam, "--tests", "default", "--threshold", "2.0", "--burn-in", "1"],
        "density": ["density", "--seq", lam, "--n", "20000", "--set", "evens", "--set", "seq:+1", "--depth", "2"],
        "measure": ["measure", "--seq", lam, "--n", "20000", "--event", "seq:+1"],
        "facts": ["facts", "--seq", lam, "--n", "20000", "--x", "mod:5:0", "--y", "mod:5:1", "--tolerance", "0.05"],
        "prg": ["prg", "--bits", "20", "--seed", "3", "--n", "5000", "--battery", "--threshold", "2.0"],
        "transfer": ["transfer", "--n", "20000", "--g", "2,1,1", "--seq", "liouville"],
        "selftest": ["selftest", "--file", lam],
    }
    for name, args in cases.items():
        out1, out2 = t / f"{name}.1.json", t / f"{name}.2.json"
        run([*args, "--json", str(out1)])
        run([*args, "--json", str(out2), "--workers", "3"])
        if out1.exists():
            validate(name, out1)
            if out1.read_bytes() != out2.read_bytes():
                failures.append(f"{name}: output depends on run or worker count")
        else:
            failures.append(f"{name}: no JSON written")

    # correlate CSV header
    csv = run(["correlate", "--seq", lam, "--test", "pm(n%2==0)", "--eps", "0.05", "--csv", "-"]).stdout
    if csv.splitlines()[0] != "n,raw,norm_n,norm_rh,norm_lil":
        failures.append("correlate CSV header: " + csv.splitlines()[0])

    # exit codes
    run(["battery", "--seq", lam, "--threshold", "0.0001", "--burn-in", "1"], expect=1)
    run(["nosuch"], expect=2)
    run(["correlate", "--seq", lam, "--test", "pm(n % 2 = 0)"], expect=2)
    run(["correlate", "--seq", lam, "--test", "pm(n % 2 == 0)", "--bogus"], expect=2)
    run(["correlate", "--seq", str(t / "missing.prseq"), "--test", "pm(n % 2 == 0)"], expect=3)
    run(["correlate", "--seq", lam, "--n", "30000", "--test", "pm(n % 2 == 0)"], expect=3)
    bad = t / "bad.prseq"
    data = bytearray(Path(lam).read_bytes())
    data[-1] ^= 0xFF
    bad.write_bytes(bytes(data))
    run(["selftest", "--file", str(bad)], expect=3)
    p = run(["correlate", "--seq", lam, "--test", "pm(n %% 2 == 0)"], expect=2)
    if "offset" not in p.stderr:
        failures.append("DSL error without position: " + p.stderr)

    # cache directory
    cache = t / "cache"
    env = {**os.environ, "PRLAB_CACHE_DIR": str(cache)}
    run(["correlate", "--seq", "mobius", "--n", "5000", "--test", "pm(n%3==0)", "--json", str(t / "c1.json")], env=env)
    run(["correlate", "--seq", "mobius", "--n", "5000", "--test", "pm(n%3==0)", "--json", str(t / "c2.json")], env=env)
    if not (cache / "mobius-1-5001.prseq").exists():
        failures.append("cache file not written")
    if (t / "c1.json").read_bytes() != (t / "c2.json").read_bytes():
        failures.append("cached run differs from sieved run")
    run(["selftest"], env=env)

    # config round trip
    cfg1, cfg2 = t / "a.cfg", t / "b.cfg"
    run(["--write-config", str(cfg1), "density", "--seq", lam, "--n", "20000", "--set", "evens", "--set", "odds",
         "--json", str(t / "d1.json")])
    run(["--config", str(cfg1), "--write-config", str(cfg2), "density", "--json", str(t / "d2.json")])
    if (t / "d1.json").read_bytes() != (t / "d2.json").read_bytes():
        failures.append("config file does not reproduce the run")
    if cfg1.read_text().replace("d1.json", "") != cfg2.read_text().replace("d2.json", ""):
        failures.append("config does not round-trip:\n" + cfg1.read_text() + "---\n" + cfg2.read_text())

for f in failures:
    print("FAIL", f)
print(f"{len(failures)} failures")
sys.exit(1 if failures else 0)
