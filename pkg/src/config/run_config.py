import logging
from dataclasses import dataclass, field

from src.config.parser import merge_config
from src.errors import ConfigError
from src.nonlinearity.nonlinearity import make_custom, make_exponential, make_power
from src.nonlinearity.tail import TailModel
from src.numerics.quadrature import QuadratureSpec
from src.picard.iterate import PicardConfig

logger = logging.getLogger(__name__)

FAMILIES = ("power", "exponential", "custom")


@dataclass(frozen=True)
class RunConfig:
    """
    Immutable view of one job: defaults, then the config file, then flags, then the job overrides.

    Attributes:
        nonlinearity (dict): family, p, expr, a and tail.
        N (int): Dimension.
        r_sequence (tuple): Radii at which tables are evaluated.
        seed (int): Seed for sampled checks.
        output (str): Output directory.
        quadrature (QuadratureSpec): Accuracy contract.
        phase_plane (dict): Keyword arguments of the shooting solver.
        picard (PicardConfig): Picard settings.
        k (int): Iterate index tabulated by the compare command.
        order (int): Highest expansion coefficient index.
        U_grid (tuple): Grid of the three-term table.
        max_doublings (int): Sampling budget of the universality criterion.
        ceiling (float): F ceiling of the universality sampling.
        raw (dict): The merged configuration, embedded in every output header.
    """

    nonlinearity: dict
    N: int
    r_sequence: tuple
    seed: int
    output: str
    quadrature: QuadratureSpec
    phase_plane: dict
    picard: PicardConfig
    k: int
    order: int
    U_grid: tuple
    max_doublings: int
    ceiling: float
    raw: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_dict(cls, config, job=None):
        """
        Builds and validates a job configuration.

        Args:
            config (dict): Merged configuration (see DEFAULT_CONFIG).
            job (dict): Per-job overrides layered on top.

        Returns:
            RunConfig: The validated configuration.

        Raises:
            ConfigError: A value is missing, malformed or out of range.
        """
        merged = merge_config(config, job or {})
        merged.pop("jobs", None)
        try:
            nonlinearity = dict(merged["nonlinearity"])
            run = merged["run"]
            picard = dict(merged["picard"])
            k = int(picard.pop("k", 2))
            spec = QuadratureSpec(**merged["quadrature"])
            picard_cfg = PicardConfig(**picard)
            instance = cls(
                nonlinearity=nonlinearity,
                N=int(run["N"]),
                r_sequence=tuple(float(r) for r in run["r_sequence"]),
                seed=int(run["seed"]),
                output=str(run["output"]),
                quadrature=spec,
                phase_plane=dict(merged["phase_plane"]),
                picard=picard_cfg,
                k=k,
                order=int(merged["expansion"]["order"]),
                U_grid=tuple(float(u) for u in merged["expansion"]["U_grid"]),
                max_doublings=int(merged["universality"]["max_doublings"]),
                ceiling=float(merged["universality"]["ceiling"]),
                raw=merged,
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Invalid configuration: {e}")
        instance._validate()
        return instance

    def _validate(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"Unknown nonlinearity family '{self.family}', expected one of {FAMILIES}.")
        if self.N < 1:
            raise ConfigError(f"N must be a positive integer, got {self.N}.")
        if not all(0 < r < 1 for r in self.r_sequence):
            raise ConfigError(f"r_sequence entries must lie in (0, 1), got {self.r_sequence}.")
        if self.order < 0:
            raise ConfigError(f"expansion.order must be non-negative, got {self.order}.")
        if self.family == "custom" and not self.nonlinearity.get("expr"):
            raise ConfigError("custom nonlinearities need nonlinearity.expr.")

    @property
    def family(self):
        return str(self.nonlinearity.get("family", "power")).lower()

    @property
    def p(self):
        return float(self.nonlinearity["p"])

    @property
    def distances(self):
        return tuple(1.0 - r for r in self.r_sequence)

    def build_nonlinearity(self):
        """
        Constructs the configured nonlinearity.

        Returns:
            Nonlinearity: The nonlinearity.

        Raises:
            ConfigError: The family parameters are incomplete.
        """
        if self.family == "power":
            if self.nonlinearity.get("p") is None:
                raise ConfigError("power nonlinearities need nonlinearity.p.")
            return make_power(self.p, spec=self.quadrature)
        if self.family == "exponential":
            return make_exponential(spec=self.quadrature)
        try:
            tail = TailModel.from_dict(self.nonlinearity.get("tail") or {})
        except (KeyError, TypeError) as e:
            raise ConfigError(f"Invalid nonlinearity.tail section: {e}")
        return make_custom(self.nonlinearity["expr"], float(self.nonlinearity.get("a", 0.0)), tail,
                           spec=self.quadrature)
