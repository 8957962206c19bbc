"""
Particle swarm optimization
===========================

The swarm maximizes a fitness function over a box.  Each particle is
pulled toward its own best position and toward the swarm's best, with an
inertia weight that decays from 0.9 to 0.4 over the run.
"""
import numpy as np

from palmvein import SwarmConfig, pso_init, pso_run, pso_step


def sphere(x):
    return -float(x @ x)


# the benchmark used for acceptance: 10 dimensions, 20 particles, 200 iterations
cfg = SwarmConfig(particles=20, iterations=200, seed=0)
best, value, history = pso_run(cfg, 10, sphere)
print("final |gbest|^2 =", -value)
print("gbest trace never gets worse:", all(b >= a for a, b in zip(history, history[1:])))
print("trace every 40 iterations:", [f"{-h:.1e}" for h in history[::40]])

finals = [-pso_run(SwarmConfig(particles=20, iterations=200, seed=s), 10, sphere).gbest_fitness for s in range(20)]
print("median over 20 seeds:", np.median(finals))

# the same search, driven step by step to watch the inertia schedule
state = pso_init(cfg, 10, sphere)
for t in range(5):
    w = cfg.inertia(state.iteration)
    pso_step(state, cfg, sphere)
    print(f"step {t}: inertia {w:.4f}, gbest {state.gbest_fitness:.3f}")

# same seed, same trajectory
again = pso_run(cfg, 10, sphere)
print("reproducible:", np.array_equal(again.gbest_position, best))
