"""
A tour of the simulated environments
====================================

Every environment exposes the same three calls: ``simulate`` for one
assignment, ``ground_truth_pair`` for two assignments in one frozen world,
and ``all_level`` for the all-treat or all-control matrix.
"""

from netinterference.core import ExperimentDesign, compute_tte, generate_staggered_design
from netinterference.envs import make_env

configs = {
    "gaussian": {"kind": "gaussian", "n_units": 400, "horizon": 6},
    "belief": {"kind": "belief", "n_units": 400, "horizon": 6, "effect_scale": 1.0},
    "linear_in_means": {"kind": "linear_in_means", "n_units": 400, "horizon": 6},
    "exercise": {"kind": "exercise", "n_units": 400, "horizon": 6},
    "data_center": {"kind": "data_center", "n_units": 40, "horizon": 6},
    "auction": {"kind": "auction", "n_units": 40, "horizon": 6},
}
design = ExperimentDesign((2, 2, 2), (0.1, 0.2, 0.5))

for name, doc in configs.items():
    env = make_env(doc)
    W = generate_staggered_design(env.n_units, design, seed=0)
    Y = env.simulate(W)
    treat, control = env.ground_truth_pair(env.all_level(1), env.all_level(0))
    tte = compute_tte(treat, control, 2)
    print(f"{name:<16} observed final mean {Y.values[:, -1].mean():8.3f}   TTE over last 2 periods {tte:8.3f}")
