# coopnet_energy tests
