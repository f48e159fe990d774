"""The soapfilm command line: build, node and analyze."""

# %% Write a small graph and build it
import json
import subprocess
import sys
import tempfile
from pathlib import Path

from soapfilm.graph import dump_graph
from soapfilm.shapes import synthetic_lattice

work = Path(tempfile.mkdtemp())
(work / "lattice.json").write_bytes(dump_graph(synthetic_lattice(2, 2, 2)))


def soapfilm(*args):
    proc = subprocess.run([sys.executable, "-m", "soapfilm.cli", *map(str, args)],
                          capture_output=True, text=True)
    print("$ soapfilm", " ".join(map(str, args)), "->", proc.returncode)
    return proc


doc = json.loads(soapfilm("build", work / "lattice.json", "-o", work / "lattice.stl",
                          "--format", "stl_binary", "--timings", work / "t.csv").stdout)
print(doc["census"])

# %% Single-node experiment with a deviation report
print(soapfilm("node", "regular12", "-o", work / "r12.obj", "--samples", 100000).stdout)

# %% Curvature analysis of an exported mesh
print(soapfilm("analyze", work / "r12.obj", "-o", work / "r12").stdout)

# %% Errors go to stderr as JSON with exit code 1 (input) or 2 (internal)
(work / "bad.json").write_text("{}")
print(soapfilm("build", work / "bad.json").stderr)
