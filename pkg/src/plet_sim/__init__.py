"""Classical simulator of polarized-light-induced electron transfer on
trapped-ion qutrit and two-qubit platforms: exact reference dynamics,
second-order Trotter compilation to pulse schedules and gate circuits, and
Lindblad-noise predictions."""

__version__ = "0.1.0"
