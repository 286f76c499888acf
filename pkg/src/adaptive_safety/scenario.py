"""Scenario configuration: the text format, presets, and object assembly.

A scenario file is INI-style text. Every value is addressed by a dotted key
``section.key`` (e.g. ``gains.beta``), which is also how overrides and sweeps
name parameters::

    [scenario]
    plant = double_integrator
    controller = tracbf

    [gains]
    Gamma = 250, 250
    beta = 0.05

Numbers may be written as simple arithmetic in ``pi`` (``pi/6``). Vectors are
comma separated. Blank values mean "not set".
"""

from __future__ import annotations

import ast
import configparser
import dataclasses
import io
import math
import operator
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import barriers, controllers, plants, tuners
from .controllers import ControllerKind
from .core import ConfigurationError, GainSet

PLANTS = ("double_integrator", "two_link")
PRESETS = ("di_tracbf", "di_racbf", "di_compare", "two_link")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    horizon: float = 10.0
    integrator: str = "rk4"
    log_stride: int = 1
    # step-doubling refinement inside each dt; 0 keeps plain fixed-step RK4
    step_tol: float = 0.0
    max_refine: int = 16

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError("sim.dt must be positive")
        if self.horizon < 0:
            raise ConfigurationError("sim.horizon must be nonnegative")
        if self.log_stride < 1:
            raise ConfigurationError("sim.log_stride must be >= 1")
        if self.integrator not in ("rk4", "euler"):
            raise ConfigurationError(f"unknown integrator {self.integrator!r}")
        if self.step_tol < 0:
            raise ConfigurationError("sim.step_tol must be nonnegative")
        if self.max_refine < 0:
            raise ConfigurationError("sim.max_refine must be nonnegative")

    @property
    def n_steps(self):
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True)
class ScenarioConfig:
    plant: str
    controller: ControllerKind
    theta_true: tuple
    Gamma: tuple
    alpha: float
    theta_tilde_bound: float
    x0: tuple
    theta_hat0: tuple
    name: str = "scenario"
    nu0: Optional[tuple] = None
    beta: Optional[float] = None
    K: Optional[tuple] = None
    Lambda: Optional[tuple] = None
    mu: Optional[float] = None
    epsilon: Optional[float] = None
    M_upper: Optional[float] = None
    x1max: Optional[float] = None
    rho: Optional[float] = None
    Delta: Optional[float] = None
    qm: Optional[float] = None
    lambda_h: Optional[float] = None
    sigma: float = 0.1
    ref_amplitude: float = 0.0
    ref_frequency: float = 0.0
    k1: float = 2.0
    k2: float = 2.0
    projection: bool = False
    proj_center: Optional[tuple] = None
    proj_radius: Optional[float] = None
    proj_boundary_layer: float = 0.1
    sim: SimConfig = field(default_factory=SimConfig)

    def __post_init__(self):
        object.__setattr__(self, "controller", ControllerKind(self.controller))
        validate(self)

    @property
    def nu_init(self):
        return self.theta_hat0 if self.nu0 is None else self.nu0

    def replace(self, **changes):
        sim_changes = {k[4:]: changes.pop(k) for k in list(changes) if k.startswith("sim.")}
        sim = dataclasses.replace(self.sim, **sim_changes) if sim_changes else self.sim
        return dataclasses.replace(self, sim=sim, **changes)


def validate(cfg):
    if cfg.plant not in PLANTS:
        raise ConfigurationError(f"unknown plant {cfg.plant!r}; expected one of {PLANTS}")
    robot = cfg.plant == "two_link"
    if robot != (cfg.controller is ControllerKind.SLOTINE_LI_HOT):
        raise ConfigurationError(
            f"controller {cfg.controller.value} is incompatible with plant {cfg.plant}")
    n, p = (2, 3) if robot else (2, 2)
    if len(cfg.theta_true) != p or len(cfg.Gamma) != p or len(cfg.theta_hat0) != p:
        raise ConfigurationError(f"parameter vectors must have {p} entries")
    if cfg.nu0 is not None and len(cfg.nu0) != p:
        raise ConfigurationError(f"initial.nu0 must have {p} entries")
    nx = 2 * n if robot else n
    if len(cfg.x0) != nx:
        raise ConfigurationError(f"initial.x0 must have {nx} entries")
    if cfg.controller.uses_hot and cfg.beta is None:
        raise ConfigurationError("gains.beta is required for high-order tuner controllers")
    needed = (("x1max", "rho", "Delta") if not robot else
              ("qm", "lambda_h", "K", "Lambda", "mu", "epsilon", "M_upper"))
    missing = [k for k in needed if getattr(cfg, k) is None]
    if missing:
        raise ConfigurationError(f"missing fields for {cfg.plant}: {', '.join(missing)}")
    if robot and (len(cfg.K) != n or len(cfg.Lambda) != n):
        raise ConfigurationError("gains.K and gains.Lambda must list the diagonal (n entries)")
    if not cfg.sigma > 0:
        raise ConfigurationError("barrier.sigma must be positive")
    # gain positivity is enforced by GainSet
    gains_of(cfg)


# --------------------------------------------------------------------------
# text format

# (section, key, attribute, type)
_FIELDS = [
    ("scenario", "name", "name", "str"),
    ("scenario", "plant", "plant", "str"),
    ("scenario", "controller", "controller", "kind"),
    ("plant", "theta_true", "theta_true", "vec"),
    ("plant", "M_upper", "M_upper", "float"),
    ("gains", "Gamma", "Gamma", "vec"),
    ("gains", "beta", "beta", "float"),
    ("gains", "alpha", "alpha", "float"),
    ("gains", "theta_tilde_bound", "theta_tilde_bound", "float"),
    ("gains", "K", "K", "vec"),
    ("gains", "Lambda", "Lambda", "vec"),
    ("gains", "mu", "mu", "float"),
    ("gains", "epsilon", "epsilon", "float"),
    ("barrier", "x1max", "x1max", "float"),
    ("barrier", "rho", "rho", "float"),
    ("barrier", "Delta", "Delta", "float"),
    ("barrier", "qm", "qm", "float"),
    ("barrier", "lambda_h", "lambda_h", "float"),
    ("barrier", "sigma", "sigma", "float"),
    ("initial", "x0", "x0", "vec"),
    ("initial", "theta_hat0", "theta_hat0", "vec"),
    ("initial", "nu0", "nu0", "vec"),
    ("reference", "amplitude", "ref_amplitude", "float"),
    ("reference", "frequency", "ref_frequency", "float"),
    ("reference", "k1", "k1", "float"),
    ("reference", "k2", "k2", "float"),
    ("projection", "enabled", "projection", "bool"),
    ("projection", "center", "proj_center", "vec"),
    ("projection", "radius", "proj_radius", "float"),
    ("projection", "boundary_layer", "proj_boundary_layer", "float"),
    ("sim", "dt", "sim.dt", "float"),
    ("sim", "horizon", "sim.horizon", "float"),
    ("sim", "integrator", "sim.integrator", "str"),
    ("sim", "log_stride", "sim.log_stride", "int"),
    ("sim", "step_tol", "sim.step_tol", "float"),
    ("sim", "max_refine", "sim.max_refine", "int"),
]
_BY_KEY = {f"{sec}.{key}": (attr, kind) for sec, key, attr, kind in _FIELDS}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def _eval_number(text):
    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"not a number: {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval").body)
    except SyntaxError as exc:
        raise ValueError(f"not a number: {text!r}") from exc


def _convert(kind, text):
    text = text.strip()
    if text == "":
        return None
    if kind == "str":
        return text
    if kind == "kind":
        return ControllerKind(text.lower())
    if kind == "float":
        return _eval_number(text)
    if kind == "int":
        return int(text)
    if kind == "bool":
        low = text.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if kind == "vec":
        return tuple(_eval_number(v) for v in text.split(","))
    raise AssertionError(kind)


def _format(kind, value):
    if value is None:
        return ""
    if kind == "kind":
        return value.value
    if kind == "float":
        return repr(float(value))
    if kind == "vec":
        return ", ".join(repr(float(v)) for v in value)
    if kind == "bool":
        return "true" if value else "false"
    return str(value)


def _apply(values):
    """Build a ScenarioConfig from a {attr: value} mapping with 'sim.' entries."""
    sim_kw = {k[4:]: values.pop(k) for k in list(values) if k.startswith("sim.")}
    sim_kw = {k: v for k, v in sim_kw.items() if v is not None}
    values = {k: v for k, v in values.items() if v is not None}
    try:
        return ScenarioConfig(sim=SimConfig(**sim_kw), **values)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


def parse_scenario(text):
    """Parse scenario text. Raises ``ConfigurationError`` on any problem."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed scenario file: {exc}") from exc
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            dotted = f"{section}.{key}"
            if dotted not in _BY_KEY:
                raise ConfigurationError(f"unknown key {dotted!r}")
            attr, kind = _BY_KEY[dotted]
            try:
                values[attr] = _convert(kind, raw)
            except ValueError as exc:
                raise ConfigurationError(f"{dotted}: {exc}") from exc
    return _apply(values)


def format_scenario(cfg):
    """Serialize to the text format; ``parse_scenario`` inverts this exactly."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for section, key, attr, kind in _FIELDS:
        value = getattr(cfg.sim, attr[4:]) if attr.startswith("sim.") else getattr(cfg, attr)
        if value is None:
            continue
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, _format(kind, value))
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def load_scenario(source):
    """Load a preset by name or a scenario file by path."""
    if str(source) in PRESETS:
        text = resources.files("adaptive_safety").joinpath("presets", f"{source}.cfg").read_text()
    else:
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read scenario {source}: {exc}") from exc
    return parse_scenario(text)


def override(cfg, dotted_key, value):
    """Return a copy with one dotted key replaced (value given as text or number)."""
    if dotted_key not in _BY_KEY:
        raise ConfigurationError(f"unknown key {dotted_key!r}")
    attr, kind = _BY_KEY[dotted_key]
    if isinstance(value, str):
        value = _convert(kind, value)
    return cfg.replace(**{attr: value})


# --------------------------------------------------------------------------
# assembly

def gains_of(cfg):
    diag = lambda v: None if v is None else np.diag(np.asarray(v, dtype=float))
    return GainSet(Gamma=np.asarray(cfg.Gamma, dtype=float), alpha=cfg.alpha,
                   theta_tilde_bound=cfg.theta_tilde_bound, beta=cfg.beta,
                   K=diag(cfg.K), Lambda=diag(cfg.Lambda), mu=cfg.mu, epsilon=cfg.epsilon)


@dataclass
class Scenario:
    """Assembled objects for one run."""

    config: ScenarioConfig
    plant: object
    barrier: object
    controller: object
    tuner: object
    gains: GainSet
    z0: np.ndarray

    @property
    def is_robot(self):
        return self.config.plant == "two_link"

    def split(self, z):
        """Split a flat state into (x, nu, theta_hat)."""
        nx = 2 * self.plant.n if self.is_robot else self.plant.n
        p = self.plant.p
        return z[:nx], z[nx:nx + p], z[nx + p:nx + 2 * p]


def build(cfg):
    gains = gains_of(cfg)
    ball = None
    if cfg.projection:
        center = np.zeros(len(cfg.Gamma)) if cfg.proj_center is None else np.asarray(cfg.proj_center)
        radius = cfg.theta_tilde_bound if cfg.proj_radius is None else cfg.proj_radius
        ball = tuners.ProjectionBall(center, radius, cfg.proj_boundary_layer)
    if cfg.controller.uses_hot:
        tuner = tuners.HighOrderTuner(gains.Gamma, gains.beta, ball)
    else:
        tuner = tuners.GradientTuner(gains.Gamma, ball)

    if cfg.plant == "double_integrator":
        plant = plants.double_integrator(cfg.theta_true)
        x1max, rho, Delta = cfg.x1max, cfg.rho, cfg.Delta
        barrier = lambda x: barriers.double_integrator_barrier(x, x1max, rho, Delta)
        ref = controllers.sinusoid(cfg.ref_amplitude, cfg.ref_frequency, 1)
        ctrl = controllers.AffineSafetyController(cfg.controller, controllers.affine_structure(plant),
                                                  barrier, gains, ref, cfg.k1, cfg.k2)
    else:
        plant = plants.two_link(cfg.theta_true, cfg.M_upper)
        qm, lam = cfg.qm, cfg.lambda_h
        barrier = lambda q: barriers.logsumexp_box_barrier(q, qm, lam)
        ref = controllers.sinusoid(cfg.ref_amplitude, cfg.ref_frequency, plant.n)
        ctrl = controllers.SlotineLiController(controllers.manipulator_structure(plant),
                                               barrier, gains, ref, cfg.sigma)
    z0 = np.concatenate([np.asarray(cfg.x0, float), np.asarray(cfg.nu_init, float),
                         np.asarray(cfg.theta_hat0, float)])
    return Scenario(cfg, plant, barrier, ctrl, tuner, gains, z0)
