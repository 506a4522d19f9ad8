from __future__ import annotations


class RobustnessError(Exception):
    """Root of every error raised by the robustness app."""


class NetworkValidationError(RobustnessError, ValueError):
    """Edge lists that break the multiplex network invariants."""


class GeneratorSpecError(RobustnessError, ValueError):
    pass


class AttackRuleError(RobustnessError, ValueError):
    """Removal probabilities outside [0, 1] or rules that don't fit the network."""


class HistogramError(RobustnessError, ValueError):
    """Degree histograms whose masses or means are inconsistent."""


class TruncationError(HistogramError):
    def __init__(self, layer: int, k_max: int, tail_mass: float):
        self.layer = layer
        self.k_max = k_max
        self.tail_mass = tail_mass
        super().__init__(
            f"layer {layer}: Poisson tail beyond k_max={k_max} is {tail_mass:.3e} (must be < 1e-10)"
        )


class ConvergenceError(RobustnessError):
    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"fixed point did not converge after {iterations} iterations (residual {residual:.3e})"
        )


class ConfigError(RobustnessError, ValueError):
    pass


class EdgeListFormatError(RobustnessError, ValueError):
    def __init__(self, path, line_no: int, message: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")
