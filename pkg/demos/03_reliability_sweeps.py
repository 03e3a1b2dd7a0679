# Walkthrough: how many raters (or sentences) until the leaderboard is
# trustworthy?
#
# Two curves answer this. Rater mode subsamples n raters, refits, and
# measures rank consistency (Spearman's rho against the full-data
# leaderboard) plus mean bootstrap CI width. Sentence mode pins the rater
# count and grows language-stratified sentence coverage instead.

from pairboard import (
    WorldSpec,
    find_threshold,
    rater_subsample_curve,
    run_simulation,
    sentence_subsample_curve,
)

spec = WorldSpec(
    n_systems=5,
    true_ratings=(1040.0, 1020.0, 1000.0, 980.0, 960.0),  # 20-Elo gaps
    n_raters=64,
    n_sentences=60,
    languages=("hin", "tam", "ben", "kan"),
    rater_noise=25.0,
    tie_rate=0.10,
    seed=404,
)
world = run_simulation(spec)
print(f"{len(world.log.records)} records, {spec.n_raters} raters\n")


def show(curve, label):
    print(label)
    print(f"  {'n':>5}  {'mean rho':>9}  {'rho std':>8}  {'mean CI width':>13}")
    for p in curve.grid:
        print(f"  {p.axis_value:>5}  {p.mean_rho:>9.3f}  {p.rho_std:>8.3f}"
              f"  {p.mean_ci_width:>13.1f}")
    hit = find_threshold(curve, 0.95)
    if hit:
        print(f"  rho >= 0.95 first reached at {hit.axis_value} "
              f"(CI width there: {hit.mean_ci_width:.1f})\n")
    else:
        print("  rho >= 0.95: not reached on this grid\n")


raters = rater_subsample_curve(
    world.log, grid=(8, 16, 32, 64), trials=30,
    bootstrap_replicates=100, seed=1,
)
show(raters, "rater subsampling (all sentences kept):")

sentences = sentence_subsample_curve(
    world.log, grid=(40, 80, 160, 240), fixed_raters=32, trials=15,
    bootstrap_replicates=100, seed=2,
)
show(sentences, "sentence subsampling (32 raters fixed, stratified per language):")

# Export for external plotting
print("CSV of the rater curve:")
print(raters.to_csv())
