"""Free-by-finite experiment: F_2 : Z/2 with the inversion action.

The tree of the free group becomes a complex over the semidirect product;
quotients by the characteristic kernels of F_2 -> (Z/2^n)^2 are Cayley
multigraphs of (Z/2^n)^2 with the involution v -> -v.  Both characters of
the involution group appear in H_1 with normalized multiplicity tending to
1/2 (one half of the first L2-Betti number of the free group), while the
involution's homology trace stays bounded, so the normalized trace decays.
"""

from l2mult import run
from l2mult.runner import ExperimentConfig

config = ExperimentConfig.from_json({
    "group": {"family": "free_by_finite", "rank": 2, "h": "cyclic:2",
              "action": {"0": ["a'", "b'"]}},
    "complex": "tree_semidirect",
    "chain": {"template": "semidirect_mod", "base": 2, "depth": 4},
    "h_words": ["1", "c"],
    "degrees": [0, 1],
    "b2": {"1": "1"},
    "infinite_centralizers": True,
    "normalize_per_h": True,
    "probe_words": ["a", "c"],
})

records, report = run(config)

print("level  index  b_1   m(triv,H1)  m(sign,H1)  normalized      trace")
for r in records:
    n = r.norm_index
    print(f"{r.level:>5}  {n:>5}  {r.betti[1]:>4}  {r.raw[(1, 0)]:>10}  "
          f"{r.raw[(1, 1)]:>10}  {float(r.normalized[(1, 0)]):.5f}/"
          f"{float(r.normalized[(1, 1)]):.5f}  {r.traces[(1, 1)]}")

seq = report["sequences"]["1,0"]
print(f"\nprediction per character: {seq['prediction']} "
      f"(final deviation {seq['final_deviation']:.5f})")
print("normalized involution traces on H_1:",
      report["trace_sequences"]["1,1"])
print("\nThe raw homology trace of the involution is the constant -3: the "
      "quotient graphs always contain four 2-torsion fixed vertices, and the "
      "Lefschetz number 1 - (-3) = 4 counts exactly those fixed points.")
