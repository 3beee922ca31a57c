# Deep survival analysis engine: synthetic data, losses, metrics, trainer
