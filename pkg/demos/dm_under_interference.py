"""
Why difference-in-means breaks under interference
=================================================

Units on a dense Gaussian interference network feel the average treatment
of everyone else. DM compares treated with control units inside one
experiment, so it never sees that shared shift.

* raising the spread ``sigma`` of the interference weights inflates variance
* raising the mean ``mu`` of the weights produces a bias of about ``-mu``

The sweep below is a reduced version of the shipped ``dm_sweep_*.toml``
configs so that it finishes in a few seconds.
"""

from netinterference.harness import SweepConfig, bands_overlap, dm_sweep

common = dict(worlds=8, resamples=20, nested=100, n_units=300)

sigma = dm_sweep(SweepConfig(sweep="sigma", values=(0.1, 0.4, 1.6), fixed=0.04, **common)).table
mu = dm_sweep(SweepConfig(sweep="mu", values=(0.01, 0.08, 0.32), fixed=0.5, **common)).table


def show(table):
    print(f"{table.rows[0][0]:>6} {'mse':>9} {'variance':>9} {'bias^2':>9} {'mean err':>9}")
    for r in table.records():
        print(f"{r['value']:>6} {r['mse']:9.4f} {r['variance']:9.4f} {r['bias2']:9.4f} {r['mean_error']:9.4f}")


show(sigma)
print("squared-bias bands overlap across sigma:", bands_overlap(sigma.column("bias2"), sigma.column("bias2_se")))
print()
show(mu)
