"""Coopnet Energy - Bit energy of cooperative AF/DF relaying under MQAM and ARQ."""

__version__ = "1.0.0"
app_name = "coopnet_energy"
app_title = "Coopnet Energy"
app_description = "Energy-per-bit model, optimizer and Monte Carlo check for one-relay cooperative networks"
app_license = "MIT"
