"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A simulation or experiment configuration violates an invariant."""


class TrainingDivergedError(RuntimeError):
    """Autoencoder training loss blew up and stayed up."""


class ModelFormatError(RuntimeError):
    """A persisted model file is unreadable, truncated, or inconsistent."""
