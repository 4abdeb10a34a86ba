"""Two-factor daily electricity price model: fractional OU base plus Hawkes-driven spikes."""

__version__ = "0.1.0"
