"""Multi-layer fingerprint network with semi-quantized activations.

Every fitting sample ends up stored in exactly one neuron.  Layer-1
neurons store raw inputs; deeper neurons store the activation vector the
sample produced at the previous layer (its "fingerprint").  Construction
is a deterministic pass over the samples in dataset order:

* admission  - the sample activates every node of the layer under
  construction only weakly (< tau_ad) and nothing strongly en route:
  it becomes a new node of that layer;
* collision  - the sample activates some existing node strongly
  (> tau_act) at an earlier layer: all deeper layers are torn down,
  their samples return to the pool in the order they were used, and the
  collider is pushed into the collided layer as its own node;
* filtering  - anything in between is deferred to the next layer.

Prediction propagates activations layer by layer, short-circuiting at
the first layer containing a strong activation (argmax retrieves the
stored output); otherwise the two most strongly activated neurons
anywhere in the network interpolate the output.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .activations import DsaParams, dsa
from .dataset import Dataset, validate_dataset
from .errors import (
    BudgetExceededError,
    DataError,
    DimensionMismatchError,
    IllDefinedDatasetError,
    UnresolvableCollisionError,
)

# Float realization of "lands exactly on an existing node": a distance
# below _EXACT_DISTANCE counts as activation 1; stored outputs differing
# by more than _OUTPUT_TOL then make the collision unresolvable.
_EXACT_DISTANCE = 1e-12
_OUTPUT_TOL = 1e-9


class InterpolationRule(enum.Enum):
    """Output rule when no neuron is strongly activated."""

    TOP_TWO_WEIGHTED = "top_two_weighted"   # activation-weighted average of the top two
    NEAREST_NODE = "nearest_node"           # output of the single most activated neuron


@dataclass(frozen=True)
class SqannConfig:
    dsa: DsaParams = field(default_factory=DsaParams)
    tau_ad: float = 0.1
    tau_act: float = 0.9
    max_construction_steps: int | None = None   # defaults to 50 * n^2 at build time
    interpolation: InterpolationRule = InterpolationRule.TOP_TWO_WEIGHTED

    def __post_init__(self):
        if not (0.0 < self.tau_ad < self.tau_act < 1.0):
            raise ValueError(
                f"thresholds must satisfy 0 < tau_ad < tau_act < 1, "
                f"got tau_ad={self.tau_ad}, tau_act={self.tau_act}"
            )
        if self.max_construction_steps is not None and self.max_construction_steps < 1:
            raise ValueError("max_construction_steps must be positive")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SqannLayer:
    """One constructed layer: node fingerprints, stored outputs, sample ids."""

    nodes: np.ndarray           # (n_k, d) fingerprints; d = input_dim for layer 1
    alphas: np.ndarray          # (n_k, output_dim) stored outputs
    sample_indices: tuple[int, ...]

    @property
    def n_nodes(self) -> int:
        return len(self.sample_indices)


@dataclass(frozen=True)
class SqannModel:
    layers: tuple[SqannLayer, ...]
    config: SqannConfig
    input_dim: int
    output_dim: int
    dataset_fingerprint: str = ""

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def housed_sample_indices(self) -> tuple[int, ...]:
        out: list[int] = []
        for layer in self.layers:
            out.extend(layer.sample_indices)
        return tuple(out)

    def predict(self, x) -> np.ndarray:
        return sqann_predict(self, x).y


@dataclass(frozen=True)
class NeuronRef:
    """Identifies one neuron and how strongly the query activated it."""

    layer: int          # 1-based layer number
    node_index: int     # 0-based within the layer
    activation: float
    sample_index: int   # fitting sample housed in the neuron


@dataclass(frozen=True)
class StrongActivation:
    layer: int
    node_index: int
    activation: float
    sample_index: int


@dataclass(frozen=True)
class Interpolated:
    neurons: tuple[NeuronRef, ...]     # one (degenerate) or two, strongest first
    weights: tuple[float, ...]         # activations normalized to sum 1


@dataclass(frozen=True)
class PredictionOutcome:
    y: np.ndarray
    provenance: StrongActivation | Interpolated
    all_activations: tuple[np.ndarray, ...]


# ---------------------------------------------------------------------------
# Construction trace


@dataclass(frozen=True)
class Admitted:
    step: int
    sample_index: int
    layer: int


@dataclass(frozen=True)
class Filtered:
    step: int
    sample_index: int
    from_layer: int


@dataclass(frozen=True)
class Collision:
    step: int
    sample_index: int
    collided_layer: int
    destroyed_layers: tuple[int, ...]
    returned_indices: tuple[int, ...]


@dataclass(frozen=True)
class ConstructionTrace:
    events: tuple[Admitted | Filtered | Collision, ...]
    steps: int

    def to_lines(self) -> list[str]:
        """One event per line: kind, sample index, layer, step."""
        lines = []
        for e in self.events:
            if isinstance(e, Admitted):
                lines.append(f"admitted sample={e.sample_index} layer={e.layer} step={e.step}")
            elif isinstance(e, Filtered):
                lines.append(f"filtered sample={e.sample_index} layer={e.from_layer} step={e.step}")
            else:
                destroyed = ",".join(str(l) for l in e.destroyed_layers)
                returned = ",".join(str(i) for i in e.returned_indices)
                lines.append(
                    f"collision sample={e.sample_index} layer={e.collided_layer} step={e.step} "
                    f"destroyed=[{destroyed}] returned=[{returned}]"
                )
        return lines


# ---------------------------------------------------------------------------
# Activation plumbing


def _activation_against(nodes: np.ndarray, v: np.ndarray, p: DsaParams) -> tuple[np.ndarray, np.ndarray]:
    """(activations, distances) of vector ``v`` against a node matrix."""
    diffs = nodes - v
    dists = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
    return dsa(dists, p), dists


def layer_activation(v, layer: SqannLayer, p: DsaParams) -> np.ndarray:
    """Activation of every node of one layer by the arriving vector ``v``."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != layer.nodes.shape[1]:
        raise DimensionMismatchError(
            f"arriving vector has dim {v.shape[0]}, layer nodes have dim {layer.nodes.shape[1]}"
        )
    acts, _ = _activation_against(layer.nodes, v, p)
    return acts


def forward_to_layer(m: SqannModel, x, upto: int | None = None):
    """Propagate ``x`` through layers 1..upto.

    Returns (activations per layer, first strong hit or None) where a hit
    is a :class:`NeuronRef` at the earliest layer whose maximum
    activation exceeds tau_act.
    """
    if upto is None:
        upto = m.n_layers
    if not 0 <= upto <= m.n_layers:
        raise ValueError(f"upto={upto} outside 0..{m.n_layers}")
    v = np.asarray(x, dtype=float).reshape(-1)
    acts: list[np.ndarray] = []
    hit: NeuronRef | None = None
    for li in range(upto):
        layer = m.layers[li]
        v = layer_activation(v, layer, m.config.dsa)
        acts.append(v)
        if hit is None:
            j = int(np.argmax(v))
            if v[j] > m.config.tau_act:
                hit = NeuronRef(li + 1, j, float(v[j]), layer.sample_indices[j])
    return acts, hit


# ---------------------------------------------------------------------------
# Construction


class _MutableLayer:
    __slots__ = ("nodes", "alphas", "ids", "_mat")

    def __init__(self):
        self.nodes: list[np.ndarray] = []
        self.alphas: list[np.ndarray] = []
        self.ids: list[int] = []
        self._mat: np.ndarray | None = None

    def add(self, node: np.ndarray, alpha: np.ndarray, sample_index: int) -> None:
        self.nodes.append(np.array(node, dtype=float))
        self.alphas.append(np.array(alpha, dtype=float))
        self.ids.append(sample_index)
        self._mat = None

    def matrix(self) -> np.ndarray:
        if self._mat is None:
            self._mat = np.asarray(self.nodes, dtype=float)
        return self._mat

    def freeze(self) -> SqannLayer:
        return SqannLayer(
            nodes=_readonly(np.asarray(self.nodes, dtype=float)),
            alphas=_readonly(np.asarray(self.alphas, dtype=float)),
            sample_indices=tuple(self.ids),
        )


def build_sqann(d: Dataset, cfg: SqannConfig = SqannConfig()) -> tuple[SqannModel, ConstructionTrace]:
    """Construct the network from ``d`` in dataset order.

    Deterministic: the same dataset order and configuration produce an
    identical model and trace.  Raises
    :class:`IllDefinedDatasetError` for contradictory duplicate inputs,
    :class:`UnresolvableCollisionError` when a sample lands exactly on a
    node storing a different output, and :class:`BudgetExceededError`
    when collision resolution cycles past the step budget.
    """
    if len(d) == 0:
        raise DataError("cannot build from an empty dataset")
    check = validate_dataset(d)
    if not check.ok:
        raise IllDefinedDatasetError(check.ill_defined_pairs)

    X = d.inputs()
    Y = d.outputs()
    n = len(d)
    budget = cfg.max_construction_steps if cfg.max_construction_steps is not None else 50 * n * n

    done: list[_MutableLayer] = []      # completed layers 1..k-1
    pool: list[int] = list(range(n))    # samples not yet housed, in construction order
    events: list = []
    steps = 0

    while pool:
        k = len(done) + 1               # layer under construction
        current = _MutableLayer()
        survivors: list[int] = []
        restart = False

        for qi, s in enumerate(pool):
            steps += 1
            if steps > budget:
                raise BudgetExceededError(steps - 1, k, trace=ConstructionTrace(tuple(events), steps - 1))

            # Propagate through completed layers, tracking the earliest strong hit.
            v = X[s]
            vecs: list[np.ndarray] = []
            strong_layer = 0            # 0 = none
            strong_exact_node = -1
            for li, layer in enumerate(done):
                acts, dists = _activation_against(layer.matrix(), v, cfg.dsa)
                vecs.append(acts)
                v = acts
                if strong_layer == 0 and float(acts.max()) > cfg.tau_act:
                    strong_layer = li + 1
                    strong_exact_node = _exact_conflict(dists, layer.alphas, Y[s])
                    break               # earliest collision wins; deeper layers are moot
            arriving = X[s] if not vecs else vecs[-1]

            if strong_layer and strong_layer < k:
                if strong_exact_node >= 0:
                    raise UnresolvableCollisionError(s, strong_layer, strong_exact_node)
                # Destructive collision: tear down everything past the collided
                # layer, give their samples back in the order they were used,
                # and push the collider into the collided layer.
                lc = strong_layer
                returned = [i for layer in done[lc:] for i in layer.ids] + list(current.ids)
                destroyed = list(range(lc + 1, len(done) + 1))
                if current.ids:
                    destroyed.append(k)
                fingerprint = X[s] if lc == 1 else vecs[lc - 2]
                done[lc - 1].add(fingerprint, Y[s], s)
                events.append(Collision(steps, s, lc, tuple(destroyed), tuple(returned)))
                del done[lc:]
                pool = returned + survivors + pool[qi + 1:]
                restart = True
                break

            # Activation against the layer under construction.
            if current.ids:
                acts_cur, dists_cur = _activation_against(current.matrix(), arriving, cfg.dsa)
                cur_max = float(acts_cur.max())
            else:
                acts_cur, dists_cur, cur_max = None, None, -1.0

            if cur_max > cfg.tau_act:
                conflict = _exact_conflict(dists_cur, current.alphas, Y[s])
                if conflict >= 0:
                    raise UnresolvableCollisionError(s, k, conflict)
                # Collision at the layer under construction: no tear-down,
                # the collider simply becomes its own node here.
                current.add(arriving, Y[s], s)
                events.append(Collision(steps, s, k, (), ()))
            elif acts_cur is None or bool((acts_cur < cfg.tau_ad).all()):
                current.add(arriving, Y[s], s)
                events.append(Admitted(steps, s, k))
            else:
                survivors.append(s)
                events.append(Filtered(steps, s, k))

        if restart:
            continue
        done.append(current)
        pool = survivors

    layers = tuple(layer.freeze() for layer in done)
    model = SqannModel(
        layers=layers,
        config=cfg,
        input_dim=d.input_dim,
        output_dim=d.output_dim,
        dataset_fingerprint=d.content_fingerprint(),
    )
    return model, ConstructionTrace(tuple(events), steps)


def _exact_conflict(dists, alphas, y) -> int:
    """Index of a node at (float-)zero distance storing a different output, else -1."""
    if dists is None:
        return -1
    alphas = np.asarray(alphas, dtype=float)
    for j in np.flatnonzero(dists < _EXACT_DISTANCE):
        if float(np.max(np.abs(alphas[int(j)] - y))) > _OUTPUT_TOL:
            return int(j)
    return -1


# ---------------------------------------------------------------------------
# Prediction and explanation


def sqann_predict(m: SqannModel, x) -> PredictionOutcome:
    """Propagate ``x`` and retrieve or interpolate an output.

    The first layer containing an activation above tau_act decides the
    output via argmax within that layer (deeper strong activations are
    ignored).  With no strong activation anywhere, the two most strongly
    activated neurons across all layers interpolate, weights proportional
    to their activations; ties prefer the lower layer, then the lower
    node index.
    """
    acts, hit = forward_to_layer(m, x)
    if hit is not None:
        layer = m.layers[hit.layer - 1]
        y = layer.alphas[hit.node_index].copy()
        provenance = StrongActivation(hit.layer, hit.node_index, hit.activation, hit.sample_index)
        return PredictionOutcome(y=y, provenance=provenance, all_activations=tuple(acts))

    candidates = [
        (-float(a), li + 1, j)
        for li, layer_acts in enumerate(acts)
        for j, a in enumerate(layer_acts)
    ]
    candidates.sort()
    take = 1 if m.config.interpolation is InterpolationRule.NEAREST_NODE else 2
    chosen = candidates[:take]
    neurons = tuple(
        NeuronRef(layer, j, -neg, m.layers[layer - 1].sample_indices[j])
        for neg, layer, j in chosen
    )
    total = sum(ref.activation for ref in neurons)
    weights = tuple(ref.activation / total for ref in neurons)
    y = np.zeros(m.output_dim)
    for ref, w in zip(neurons, weights):
        y += w * m.layers[ref.layer - 1].alphas[ref.node_index]
    return PredictionOutcome(y=y, provenance=Interpolated(neurons, weights), all_activations=tuple(acts))


REGIME_STRONG = "strong"
REGIME_MODERATE = "moderate"
REGIME_WEAK = "weak"


def _regime(value: float, cfg: SqannConfig) -> str:
    if value > cfg.tau_act:
        return REGIME_STRONG
    if value < cfg.tau_ad:
        return REGIME_WEAK
    return REGIME_MODERATE


@dataclass(frozen=True)
class ReferenceSample:
    """A provenance neuron resolved to its fitting sample and stored output."""

    layer: int
    node_index: int
    sample_index: int
    activation: float
    regime: str
    stored_y: np.ndarray


@dataclass(frozen=True)
class ExplanationReport:
    outcome: PredictionOutcome
    references: tuple[ReferenceSample, ...]
    regimes: tuple[tuple[str, ...], ...]    # per layer, per node
    ood_suspect: bool


def explain(m: SqannModel, x) -> ExplanationReport:
    """Prediction plus provenance: which stored samples produced it.

    ``regimes`` classifies every neuron's response as strong, moderate
    or weak; ``ood_suspect`` is set when nothing responds strongly, in
    which case the output is an interpolation between the references.
    """
    outcome = sqann_predict(m, x)
    regimes = tuple(
        tuple(_regime(float(a), m.config) for a in layer_acts)
        for layer_acts in outcome.all_activations
    )
    if isinstance(outcome.provenance, StrongActivation):
        p = outcome.provenance
        refs = [(p.layer, p.node_index, p.activation, p.sample_index)]
    else:
        refs = [(r.layer, r.node_index, r.activation, r.sample_index)
                for r in outcome.provenance.neurons]
    references = tuple(
        ReferenceSample(
            layer=layer,
            node_index=j,
            sample_index=sidx,
            activation=act,
            regime=regimes[layer - 1][j],
            stored_y=m.layers[layer - 1].alphas[j].copy(),
        )
        for layer, j, act, sidx in refs
    )
    return ExplanationReport(
        outcome=outcome,
        references=references,
        regimes=regimes,
        ood_suspect=isinstance(outcome.provenance, Interpolated),
    )
