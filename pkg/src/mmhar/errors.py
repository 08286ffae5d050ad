class ShapeMismatch(ValueError):
    pass


class TubeletMismatch(ValueError):
    pass


class AlignmentGap(ValueError):
    pass


class DegenerateSplit(ValueError):
    pass


class ModalityMismatch(ValueError):
    pass


class NonMonotonicTimestamp(ValueError):
    pass


class EmptyPredictions(ValueError):
    pass


class NonFiniteLoss(RuntimeError):
    def __init__(self, epoch: int, batch: int, value: float):
        super().__init__(f"non-finite loss {value} at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch
        self.value = value


class ConfigError(ValueError):
    pass
