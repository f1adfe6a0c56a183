"""Software-in-the-loop onboard software for a stratospheric balloon mission.

The package bundles the flight logic (mode automaton, subsystem control
cycles, TM/TC handling), a register-level simulated hardware layer, a
fixed-priority task runtime with a deterministic virtual-time mode, and
the verification analytics used to judge a run.
"""

__version__ = "0.1.0"
