"""An M/M/1/K queue written as a stochastic Petri net.

Two places (Free capacity, Queue) and two exponential transitions
(arrive, serve) reproduce the classic finite birth-death queue.  The
script solves the generated Markov chain and compares the stationary
distribution against the textbook closed form pi_n ~ rho^n.
"""

import numpy as np

from spnperf import Place, SpnNet, Transition, explore, steady_state
from spnperf.solver import mean_token_count, response_time_little, transition_throughput

LAM, MU, K = 1.0, 2.0, 5

places = (Place("Free", K), Place("Queue", 0))
transitions = (Transition("arrive", LAM), Transition("serve", MU))
pre = np.array([[1, 0], [0, 1]])
post = np.array([[0, 1], [1, 0]])
net = SpnNet(places, transitions, pre, post)

ctmc = explore(net)
dist = steady_state(ctmc)

rho = LAM / MU
closed_form = np.array([rho**n * (1 - rho) / (1 - rho ** (K + 1)) for n in range(K + 1)])

print(f"M/M/1/{K} with lambda={LAM}, mu={MU}: {ctmc.n_states} states")
print(f"{'n':>3} {'solver':>12} {'closed form':>12}")
for n, (got, want) in enumerate(zip(dist.probabilities, closed_form)):
    print(f"{n:>3} {got:12.8f} {want:12.8f}")
print("max relative error:", (np.abs(dist.probabilities - closed_form) / closed_form).max())

throughput = transition_throughput(ctmc, dist, "serve")
queue = mean_token_count(ctmc, dist, "Queue")
print(f"throughput      : {throughput:.6f}")
print(f"mean queue      : {queue:.6f}")
print(f"response (L/X)  : {response_time_little(queue, throughput):.6f}")
