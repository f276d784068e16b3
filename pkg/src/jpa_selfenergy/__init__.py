"""Non-Markovian self-energy, gain and bandwidth model of a coupled parametric amplifier."""

__version__ = "0.1.0"
