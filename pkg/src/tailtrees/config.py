"""JSON model configurations.

Three kinds are recognised:

``markov_tree``
    ``{"kind": "markov_tree", "alpha": a, "nodes": [{"id": .., "c": ..}],
    "edges": [{"from": .., "to": .., "increment": {..}, "reverse": {..},
    "pickands": {..}}]}``. ``increment`` is the law of ``M_{from,to}``,
    ``reverse`` optionally that of ``M_{to,from}``; ``pickands`` gives the
    dependence function of ``(X_from, X_to)`` for simulation and, when no
    ``increment`` is present, the increment itself. Nodes without ``c``
    are outside ``I``. An optional ``"K"`` lists nodes for ``verify``.
``max_linear``
    ``{"kind": "max_linear", "alpha": a, "coeff": [[..], ..]}``.
``recursive_ml``
    ``{"kind": "recursive_ml", "alpha": a, "nodes": [{"id": .., "gamma": ..}],
    "edges": [{"from": .., "to": .., "gamma": ..}]}``.
"""

import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .increments import increment_from_pickands, parse_increment, parse_pickands, pickands_from_increment
from .maxlinear import MaxLinearModel, RecursiveMLModel, marginal_constants, sem_to_maxlinear
from .tail_tree import TailTreeModel
from .tree import _edge_ends, _node_id, parse_tree

KINDS = ("markov_tree", "max_linear", "recursive_ml")


@dataclass
class ModelConfig:
    """A loaded model.

    ``model`` is a :class:`TailTreeModel` for ``markov_tree`` and a
    :class:`MaxLinearModel` otherwise (recursive SEMs are converted).
    """

    kind: str
    model: object
    pickands: dict = field(default_factory=dict)
    sem: object = None
    K: tuple = ()

    @property
    def nodes(self):
        return self.model.tree.nodes if self.kind == "markov_tree" else self.model.nodes

    @property
    def constants(self):
        if self.kind == "markov_tree":
            return dict(self.model.c)
        return dict(zip(self.model.nodes, marginal_constants(self.model).tolist()))

    def simulation_pickands(self):
        """Dependence function per stored edge direction, for the simulator."""
        if self.kind != "markov_tree":
            raise ConfigError("simulation needs a markov_tree model")
        out = dict(self.pickands)
        for (a, b), m in self.model.stored.items():
            if (a, b) not in out and (b, a) not in out:
                out[(a, b)] = pickands_from_increment(m)
        return out


def _alpha(doc):
    if "alpha" not in doc:
        raise ConfigError("model config lacks 'alpha'")
    try:
        return float(doc["alpha"])
    except (TypeError, ValueError):
        raise ConfigError(f"alpha must be a number, got {doc['alpha']!r}") from None


def _markov_tree(doc):
    tree = parse_tree(doc)
    c = {}
    for raw in doc["nodes"]:
        if isinstance(raw, dict) and raw.get("c") is not None:
            c[_node_id(raw)] = raw["c"]
    increments, pickands = {}, {}
    for e in doc["edges"]:
        if not isinstance(e, dict):
            raise ConfigError(f"markov_tree edges must be objects with from/to, got {e!r}")
        a, b = _edge_ends(e)
        if "pickands" in e:
            pickands[(a, b)] = parse_pickands(e["pickands"])
        if "increment" in e:
            increments[(a, b)] = parse_increment(e["increment"])
        elif (a, b) in pickands:
            increments[(a, b)] = increment_from_pickands(pickands[(a, b)])
        else:
            raise ConfigError(f"edge ({a!r}, {b!r}) needs an 'increment' or a 'pickands' spec")
        if "reverse" in e:
            increments[(b, a)] = parse_increment(e["reverse"])
    model = TailTreeModel(tree, _alpha(doc), c, increments)
    K = tuple(_node_id(v) for v in doc.get("K", ()))
    for v in K:
        if v not in tree:
            raise ConfigError(f"K lists unknown node {v!r}")
    return ModelConfig("markov_tree", model, pickands, K=K)


def _recursive_ml(doc):
    try:
        nodes = {_node_id(v): v["gamma"] for v in doc["nodes"]}
        edges = {_edge_ends(e): e["gamma"] for e in doc["edges"]}
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"recursive_ml nodes and edges need 'id'/'from'/'to' and 'gamma': {exc}") from None
    rm = RecursiveMLModel(nodes, edges)
    return ModelConfig("recursive_ml", sem_to_maxlinear(rm, _alpha(doc)), sem=rm)


def load_model(doc):
    """Build a :class:`ModelConfig` from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise ConfigError("model config must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"model kind must be one of {KINDS}, got {kind!r}")
    try:
        if kind == "markov_tree":
            return _markov_tree(doc)
        if kind == "max_linear":
            if "coeff" not in doc:
                raise ConfigError("max_linear config lacks 'coeff'")
            return ModelConfig("max_linear", MaxLinearModel(doc["coeff"], _alpha(doc)))
        return _recursive_ml(doc)
    except KeyError as exc:
        raise ConfigError(f"model config lacks {exc.args[0]!r}") from None


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None


def load_model_file(path):
    return load_model(read_json(path))
