"""Dict-returning entry points for coopnet_energy."""
