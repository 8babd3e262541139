"""The infinite dihedral group acting on the line, quotients by mZ.

Each quotient is a circle with 2m cells carrying the residual reflection.
The multiplicity table of the two characters of the reflection group in
H_0 and H_1 is (1, 0, 0, 1) at every level, so the normalized values decay
like 1/(2m) to the predicted limits 0.
"""

import json

from l2mult import emit, run
from l2mult.runner import ExperimentConfig

config = ExperimentConfig.from_json({
    "group": {"family": "dihedral_infinite"},
    "complex": "line_dinf",
    "chain": {"template": "dihedral", "orders": [2, 4, 8, 16, 32]},
    "h_words": ["1", "b"],
    "degrees": [0, 1],
    "b2": {"0": "0", "1": "0"},
    "infinite_centralizers": True,
    "probe_words": ["a", "b"],
    "char_convergence": 0,
})

records, report = run(config)

print("level  [G:Gamma]  m(triv,H0) m(sign,H0) m(triv,H1) m(sign,H1)")
for r in records:
    raw = [r.raw[(p, c)] for p in (0, 1) for c in (0, 1)]
    print(f"{r.level:>5}  {r.index:>9}  " + "  ".join(f"{m:>9}" for m in raw))

print("\nnormalized sequences with predictions:")
for key, seq in sorted(report["sequences"].items()):
    print(f"  (p,chi)=({key}): {seq['values']} -> {seq['prediction']}")

print("\nreflection traces on homology, divided by the index:")
for key, seq in sorted(report["trace_sequences"].items()):
    print(f"  (p,h)=({key}): {seq}")

print("\ncentralizer growth along the chain:",
      json.dumps(report["centralizer_growth"]))

paths = emit(records, report, "demo_output/dihedral", "both")
print("\nwrote", *map(str, paths))
