"""Exception hierarchy.

Every error carries a short machine-readable ``code`` and an optional
``context`` dict so the CLI can emit structured error JSON.
"""


class FrameError(ValueError):
    code = "frame_error"

    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self):
        return {"code": self.code, "message": self.message, "context": self.context}


class ShapeError(FrameError):
    code = "shape_mismatch"


class NotAFrameError(FrameError):
    """Raised when an operation needs a spanning sequence and did not get one."""

    code = "not_a_frame"


class HypothesisError(FrameError):
    """A theorem hypothesis / operation precondition does not hold."""

    code = "hypothesis_violated"


class CombinatorialGuardError(FrameError):
    code = "combinatorial_guard"


class NotDualError(FrameError):
    code = "not_dual_pair"
