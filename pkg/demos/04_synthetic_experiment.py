"""
Recommending to newcomers: a synthetic experiment
=================================================

Half of the attendees are cold: during training they only went to their
group's meetup, so their talk preferences are all zero. Only their friends
and co-attendees can tell us which talk they will pick.
"""

from lnfrec.evaluation import precision, run_experiment
from lnfrec.pipeline import METHODS, Recommender, split_bundle
from lnfrec.synth import SyntheticSpec, generate_synthetic

spec = SyntheticSpec(users_per_group=30, cold_fraction=0.5)
sb = generate_synthetic(seed=1, spec=spec)
split = split_bundle(sb.bundle, spec.train_sessions)
print(f"{len(split.users)} users, {len(sb.cold)} cold, {len(split.test_sessions)} test sessions")

###############################################################################
# All six methods, scored on everyone and on the cold users alone.

rec = Recommender(split)
cold_truth = {k: v for k, v in split.truth.items() if k[0] in sb.cold}
report = run_experiment(split, METHODS, recommender=rec)
for cell in report.cells:
    cold = precision(rec.run(cell["method"]).recommendations, cold_truth)
    print(f"{cell['method']:<11} precision {cell['precision']:.3f}  nDCG {cell['ndcg']:.3f}  cold {cold:.3f}")

###############################################################################
# Organisers care about head counts: predicted attendance for one session.

session = next(iter(split.test_sessions))
print(f"predicted attendance in {session}:")
for event, v in report.cells[-1]["attendance"][session].items():
    print(f"  {event}: {v['count']} first choices, {v['expected']:.1f} expected")
