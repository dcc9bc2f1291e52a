"""Pydantic models for every wire format, plus converters to core objects.

The JSON series format is
``{"trunc": N, "shape": [...], "terms": [{"n", "m", "re", "im"}, ...]}`` with
``shape`` empty for scalars, ``[l]`` for vectors and ``[r, c]`` for matrices;
vector/matrix terms carry their entries row-major as ``{"re", "im"}`` objects
under ``"entries"`` instead of inline ``re``/``im``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from .gevrey import GevreyEstimate, MonomialDecomposition, SummabilityLevel
from .pfaffian import PfaffianSystem, YPolynomial
from .series import BivariateSeries, BlowupMap, MonomialIndex
from .tauberian import NormalizationTranscript
from .values import as_value, to_complex


def parse_fraction(raw: Union[int, float, str, Fraction]) -> Fraction:
    if isinstance(raw, str):
        return Fraction(raw)
    return Fraction(raw)


class ComplexModel(BaseModel):
    re: float = 0.0
    im: float = 0.0

    @classmethod
    def of(cls, z) -> "ComplexModel":
        z = complex(z)
        return cls(re=z.real, im=z.imag)

    def to_complex(self) -> complex:
        return complex(self.re, self.im)


class SeriesTermModel(BaseModel):
    n: int = Field(ge=0)
    m: int = Field(ge=0)
    re: Optional[float] = None
    im: Optional[float] = None
    entries: Optional[list[ComplexModel]] = None

    @model_validator(mode="after")
    def _one_payload(self):
        scalar = self.re is not None or self.im is not None
        if scalar and self.entries is not None:
            raise ValueError("term carries both scalar re/im and entries")
        if not scalar and self.entries is None:
            raise ValueError("term carries neither re/im nor entries")
        return self


class SeriesModel(BaseModel):
    trunc: int = Field(ge=-1)
    shape: list[int] = Field(default_factory=list)
    terms: list[SeriesTermModel] = Field(default_factory=list)

    @classmethod
    def of(cls, s: BivariateSeries) -> "SeriesModel":
        terms = []
        for (n, m) in s.support():
            v = to_complex(s.coeffs[(n, m)])
            if s.shape == ():
                terms.append(SeriesTermModel(n=n, m=m, re=v.real, im=v.imag))
            else:
                flat = [ComplexModel.of(z) for z in v.ravel()]
                terms.append(SeriesTermModel(n=n, m=m, entries=flat))
        return cls(trunc=s.trunc, shape=list(s.shape), terms=terms)

    def to_series(self, exact: bool = False) -> BivariateSeries:
        shape = tuple(self.shape)
        entries = []
        for t in self.terms:
            if shape == ():
                if t.entries is not None:
                    raise ValueError("scalar series term must use re/im")
                val = complex(t.re or 0.0, t.im or 0.0)
            else:
                if t.entries is None:
                    raise ValueError("vector/matrix series term must use entries")
                size = 1
                for d in shape:
                    size *= d
                if len(t.entries) != size:
                    raise ValueError(
                        f"term ({t.n}, {t.m}) has {len(t.entries)} entries, expected {size}"
                    )
                flat = [c.to_complex() for c in t.entries]
                val = [flat[i] for i in range(size)]
                if len(shape) == 2:
                    val = [
                        flat[i * shape[1] : (i + 1) * shape[1]] for i in range(shape[0])
                    ]
            entries.append(((t.n, t.m), val))
        from .series import build_series

        return build_series(entries, self.trunc, shape, exact)


class MonomialModel(BaseModel):
    p: int = Field(ge=1)
    q: int = Field(ge=1)

    @classmethod
    def of(cls, m: MonomialIndex) -> "MonomialModel":
        return cls(p=m.p, q=m.q)

    def to_monomial(self) -> MonomialIndex:
        return MonomialIndex(self.p, self.q)


class LevelModel(BaseModel):
    p: int = Field(ge=1)
    q: int = Field(ge=1)
    k: Union[int, float, str]

    @classmethod
    def of(cls, level: SummabilityLevel) -> "LevelModel":
        return cls(p=level.p, q=level.q, k=str(level.k))

    def to_level(self) -> SummabilityLevel:
        return SummabilityLevel(self.p, self.q, parse_fraction(self.k))


class BlowupModel(BaseModel):
    axis: Literal["pi1", "pi2"]
    power: int = Field(default=1, ge=1)

    @classmethod
    def of(cls, b: BlowupMap) -> "BlowupModel":
        return cls(axis=b.axis, power=b.power)

    def to_map(self) -> BlowupMap:
        return BlowupMap(self.axis, self.power)


class DecompositionModel(BaseModel):
    monomial: MonomialModel
    source_trunc: int
    layers: list[SeriesModel]

    @classmethod
    def of(cls, d: MonomialDecomposition) -> "DecompositionModel":
        return cls(
            monomial=MonomialModel.of(d.monomial),
            source_trunc=d.source_trunc,
            layers=[SeriesModel.of(layer) for layer in d.layers],
        )

    def to_decomposition(self, exact: bool = False) -> MonomialDecomposition:
        return MonomialDecomposition(
            monomial=self.monomial.to_monomial(),
            layers=[layer.to_series(exact) for layer in self.layers],
            source_trunc=self.source_trunc,
        )


class ExponentsModel(BaseModel):
    p: int = Field(ge=1)
    q: int = Field(ge=1)
    p_prime: int = Field(ge=1)
    q_prime: int = Field(ge=1)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.p, self.q, self.p_prime, self.q_prime)


class SystemTermModel(BaseModel):
    alpha: list[int]
    series: SeriesModel


class SystemModel(BaseModel):
    exponents: ExponentsModel
    dim: int = Field(ge=1)
    y_degree: int = Field(ge=0)
    terms_f1: list[SystemTermModel]
    terms_f2: list[SystemTermModel]

    @classmethod
    def of(cls, sys: PfaffianSystem) -> "SystemModel":
        def dump(fp: YPolynomial) -> list[SystemTermModel]:
            return [
                SystemTermModel(alpha=list(a), series=SeriesModel.of(s))
                for a, s in sorted(fp.terms.items())
            ]

        return cls(
            exponents=ExponentsModel(
                p=sys.p, q=sys.q, p_prime=sys.p_prime, q_prime=sys.q_prime
            ),
            dim=sys.dim,
            y_degree=sys.y_degree,
            terms_f1=dump(sys.f1),
            terms_f2=dump(sys.f2),
        )

    def to_system(self, exact: bool = False) -> PfaffianSystem:
        def load(terms: list[SystemTermModel]) -> YPolynomial:
            out = {}
            for t in terms:
                if len(t.alpha) != self.dim:
                    raise ValueError(
                        f"multi-index {t.alpha} has arity {len(t.alpha)}, expected {self.dim}"
                    )
                key = tuple(t.alpha)
                s = t.series.to_series(exact)
                out[key] = out[key] + s if key in out else s
            return YPolynomial(self.dim, out)

        e = self.exponents
        return PfaffianSystem(
            p=e.p,
            q=e.q,
            p_prime=e.p_prime,
            q_prime=e.q_prime,
            dim=self.dim,
            y_degree=self.y_degree,
            f1=load(self.terms_f1),
            f2=load(self.terms_f2),
        )


class MatrixModel(BaseModel):
    """Constant matrix as row-major rows of complex entries."""

    rows: list[list[ComplexModel]]

    def to_value(self, exact: bool = False):
        n = len(self.rows)
        if any(len(r) != len(self.rows[0]) for r in self.rows):
            raise ValueError("matrix rows must have equal length")
        data = [[c.to_complex() for c in row] for row in self.rows]
        return as_value(data, (n, len(self.rows[0])), exact)


# --------------------------------------------------------------- run config


class PadeConfig(BaseModel):
    L: int = Field(default=18, ge=0)
    M: int = Field(default=18, ge=0)


class QuadratureConfig(BaseModel):
    nodes: int = Field(default=64, ge=8)
    panels: Optional[int] = Field(default=None, ge=1)
    xi_max_factor: float = Field(default=40.0, gt=0)
    pole_margin: float = Field(default=0.1, gt=0)
    residue_tol: float = Field(default=1e-5, gt=0)


class RunConfig(BaseModel):
    mode: Literal["float", "rational"] = "float"
    pade: PadeConfig = Field(default_factory=PadeConfig)
    quadrature: QuadratureConfig = Field(default_factory=QuadratureConfig)
    degree_floor: Optional[int] = Field(default=None, ge=0)
    cluster_tol: float = Field(default=0.05, gt=0)
    pole_radius: float = Field(default=10.0, gt=0)
    radius: Optional[float] = Field(default=None, gt=0)

    @property
    def exact(self) -> bool:
        return self.mode == "rational"


# ------------------------------------------------------- requests / responses


class DecomposeRequest(BaseModel):
    series: SeriesModel
    monomial: MonomialModel
    config: RunConfig = Field(default_factory=RunConfig)


class DecomposeResponse(BaseModel):
    config: RunConfig
    decomposition: DecompositionModel


class GevreyRequest(BaseModel):
    series: SeriesModel
    monomial: MonomialModel
    s: Optional[float] = Field(default=None, ge=0)
    config: RunConfig = Field(default_factory=RunConfig)


class GevreyEstimateModel(BaseModel):
    s_hat: float
    c_hat: float
    a_hat: float
    window: tuple[int, int]
    residual: float

    @classmethod
    def of(cls, e: GevreyEstimate) -> "GevreyEstimateModel":
        return cls(
            s_hat=e.s_hat, c_hat=e.c_hat, a_hat=e.a_hat, window=e.window, residual=e.residual
        )


class CertificateModel(BaseModel):
    s: float
    refused: bool
    C: Optional[float] = None
    A: Optional[float] = None
    degree_floor: int


class GrowthRowModel(BaseModel):
    n: int
    m: int
    degree: int
    log_norm: float
    fitted: float


class GevreyResponse(BaseModel):
    config: RunConfig
    monomial: MonomialModel
    estimate: GevreyEstimateModel
    certificate: CertificateModel
    growth_rows: list[GrowthRowModel]


class LevelsRequest(BaseModel):
    candidate: LevelModel
    components: list[LevelModel]
    config: RunConfig = Field(default_factory=RunConfig)


class InvariantModel(BaseModel):
    kp: str
    kq: str


class VerdictModel(BaseModel):
    compatible: bool
    reason: str
    invariants: list[InvariantModel]


class TranscriptStepModel(BaseModel):
    map: BlowupModel
    before: list[LevelModel]
    after: list[LevelModel]


class TranscriptModel(BaseModel):
    steps: list[TranscriptStepModel]
    terminal: Literal["strict_order", "coincidence"]
    levels: list[LevelModel]
    coincidence: Optional[tuple[int, int]] = None

    @classmethod
    def of(cls, t: NormalizationTranscript) -> "TranscriptModel":
        return cls(
            steps=[
                TranscriptStepModel(
                    map=BlowupModel.of(s.bmap),
                    before=[LevelModel.of(lv) for lv in s.before],
                    after=[LevelModel.of(lv) for lv in s.after],
                )
                for s in t.steps
            ],
            terminal=t.terminal,
            levels=[LevelModel.of(lv) for lv in t.levels],
            coincidence=t.coincidence,
        )


class LevelsResponse(BaseModel):
    config: RunConfig
    verdict: VerdictModel
    transcript: Optional[TranscriptModel] = None


class PointModel(BaseModel):
    x1: ComplexModel
    x2: ComplexModel


class SumRequest(BaseModel):
    series: Optional[SeriesModel] = None
    decomposition: Optional[DecompositionModel] = None
    level: LevelModel
    direction: float = 0.0
    points: list[PointModel]
    config: RunConfig = Field(default_factory=RunConfig)

    @model_validator(mode="after")
    def _series_or_decomposition(self):
        if (self.series is None) == (self.decomposition is None):
            raise ValueError("provide exactly one of series or decomposition")
        return self


class SumRowModel(BaseModel):
    x1: ComplexModel
    x2: ComplexModel
    t: ComplexModel
    value_re: float
    value_im: float
    tail_bound: float


class SumResponse(BaseModel):
    config: RunConfig
    level: LevelModel
    direction: float
    rows: list[SumRowModel]


class SingularRequest(BaseModel):
    series: SeriesModel
    level: LevelModel
    point: PointModel
    config: RunConfig = Field(default_factory=RunConfig)


class SingularResponse(BaseModel):
    config: RunConfig
    directions: list[float]


class SolveRequest(BaseModel):
    system: SystemModel
    side: Literal[1, 2] = 1
    order: int = Field(ge=0)
    config: RunConfig = Field(default_factory=RunConfig)


class SolveResponse(BaseModel):
    config: RunConfig
    side: int
    order: int
    solution: SeriesModel
    residual_max_norm: float
    residual_valuation: Optional[int] = None


class CheckRequest(BaseModel):
    system: SystemModel
    order: int = Field(ge=0)
    config: RunConfig = Field(default_factory=RunConfig)


class ResidualTermModel(BaseModel):
    alpha: list[int]
    series: SeriesModel


class CheckResponse(BaseModel):
    config: RunConfig
    order: int
    integrable: bool
    max_norm: float
    residual: list[ResidualTermModel]


class ClassifyRequest(BaseModel):
    exponents: ExponentsModel
    a: MatrixModel
    b: MatrixModel
    config: RunConfig = Field(default_factory=RunConfig)


class PairModel(BaseModel):
    mu: ComplexModel
    lam: ComplexModel
    satisfied: bool
    restricted: bool


class DiagnosisModel(BaseModel):
    case: str
    violated: bool
    eigenvalues_a: Optional[list[ComplexModel]] = None
    eigenvalues_b: Optional[list[ComplexModel]] = None
    pairs: Optional[list[PairModel]] = None
    a_nilpotent: Optional[bool] = None
    b_nilpotent: Optional[bool] = None


class ClassifyResponse(BaseModel):
    config: RunConfig
    exponents: ExponentsModel
    diagnosis: DiagnosisModel


class ReduceRequest(BaseModel):
    a: SeriesModel
    b: SeriesModel
    exponents: ExponentsModel
    config: RunConfig = Field(default_factory=RunConfig)


class ReduceResponse(BaseModel):
    config: RunConfig
    atilde: SeriesModel
    btilde: SeriesModel
    residual: SeriesModel
    residual_max_norm: float


class PullbackRequest(BaseModel):
    system: SystemModel
    map: BlowupModel
    config: RunConfig = Field(default_factory=RunConfig)


class PullbackResponse(BaseModel):
    config: RunConfig
    system: SystemModel
