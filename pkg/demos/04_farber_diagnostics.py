"""Farber and relative Farber diagnostics for two chains in D_inf.

The non-normal subgroups mZ : {+-1} form a chain whose fixed-coset
fractions vanish in the limit (the chain is Farber), yet the biset values
at (1, s) stay pinned at 1 because the reflection sits inside every level:
the chain fails the relative condition.  The kernel chain mZ satisfies both.
"""

from l2mult.runner import (ExperimentConfig, ExperimentContext,
                           farber_diagnostic, rel_farber_diagnostic)


def context(template):
    return ExperimentContext(ExperimentConfig.from_json({
        "group": {"family": "dihedral_infinite"},
        "complex": "line_dinf",
        "chain": {"template": template, "orders": [2, 4, 8, 16]},
        "h_words": ["1", "b"],
        "probe_words": ["1", "a", "aa", "b"],
    }))


for template in ("dihedral_reflection", "dihedral"):
    ctx = context(template)
    print(f"\n=== chain template {template!r} "
          f"(normal: {all(lv.is_normal() for lv in ctx.chain.levels)}) ===")
    print("fixed-coset fractions:")
    for row in farber_diagnostic(ctx.chain, ctx.probes):
        print(f"  level {row['level']} word {row['word']:>3}: "
              f"count {row['count']:>2}  fraction {row['fraction']}")
    print("biset character deviations from the limit:")
    for row in rel_farber_diagnostic(ctx.chain, ctx.h_elems, ctx.probes):
        if row["deviation"]:
            print(f"  level {row['level']} (g,h)=({row['g']},{row['h']}): "
                  f"value {row['value']} limit {row['limit']}")
