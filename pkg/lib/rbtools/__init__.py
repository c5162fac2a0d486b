"""
===============
The rbtools API
===============

rbtools provides a programmatic python API for planning an autonomous
vehicle's passage through a single-lane roundabout. The key modules of
interest for third-party developers are:

- rbtools.geometry: roundabout layouts, designated paths and region lookup
- rbtools.dynamics: kinematic transition models and the IDM car follower
- rbtools.rewards: the five-part reward function and jerk re-selection
- rbtools.pomdp: object-oriented states, observations, histories and beliefs
- rbtools.planner: Monte-Carlo tree search and the decision cycle
- rbtools.simulator: closed-loop episodes against background traffic

"""
