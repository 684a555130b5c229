"""
Latent networks: preferences, similarity, relevancy and friendship
==================================================================

Observed behaviour is turned into four latent views of the attendees. We use
a small synthetic conference with two interest groups so the structure is
easy to see.
"""

import numpy as np

from lnfrec.latent import ContextCatalog, RelationThresholds, classify_friends, derive_latent
from lnfrec.pipeline import split_bundle
from lnfrec.synth import SyntheticSpec, generate_synthetic

sb = generate_synthetic(seed=7, spec=SyntheticSpec(users_per_group=6))
split = split_bundle(sb.bundle, sb.spec.train_sessions)
obs = split.observed
latent = derive_latent(obs.participation, obs.proximity, ContextCatalog.from_schedule(sb.bundle.schedule))

###############################################################################
# Context preferences: share of each context's scheduled time a user attended.

np.set_printoptions(precision=2, suppress=True)
print("contexts:", latent.prefs.contexts)
print(latent.prefs.values[:4])

###############################################################################
# Preference similarity is an adjusted cosine mapped to [0, 1]. Users of the
# same group are near 1, users of different groups near 0.

groups = np.array([sb.groups[u] for u in latent.prefs.users])
same = groups[:, None] == groups[None, :]
print("mean lambda within groups: %.3f" % np.nanmean(latent.lam[same]))
print("mean lambda across groups: %.3f" % np.nanmean(latent.lam[~same]))
u = latent.prefs.users[0]
print(f"K nearest neighbours of {u}:", latent.similarity.neighbors[u])

###############################################################################
# Attendance relevancy is a duration-weighted Jaccard over shared events;
# pairs above phi are co-attendees.

th = RelationThresholds()
print("co-attendee pairs at phi=%.1f: %d" % (th.phi, len(latent.relevancy.coattendees(th.phi))))

###############################################################################
# Friends are pairs who met often enough (frequency) or long enough (time).

friends = classify_friends(latent.encounters, th)
print(f"{len(friends)} friend pairs, e.g. {sorted(friends)[:3]}")
