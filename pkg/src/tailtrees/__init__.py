"""Extremes of Markov trees: tail trees, root changes and tail-measure functionals."""

from .errors import (
    ConfigError,
    MomentInconsistencyError,
    NumericalError,
    PreconditionError,
    TailTreeError,
    TreeStructureError,
    ZeroMassError,
)
from .increments import (
    Discrete,
    Empirical,
    GridPickands,
    HuslerReiss,
    HuslerReissPickands,
    LogNormal,
    PickandsFunction,
    alpha_moment,
    comonotone_pickands,
    increment_from_pickands,
    independence_pickands,
    pickands_from_increment,
    reverse_increment,
    sample_increment,
)
from .maxlinear import (
    MaxLinearModel,
    RecursiveMLModel,
    marginal_constants,
    maxlinear_tail_law,
    sample_maxlinear,
    sem_to_maxlinear,
    theta_moment_ml,
)
from .simulate import (
    MarkovTreeSampler,
    compare_distributions,
    conditional_sample_maxstable,
    empirical_tail_constant,
    empirical_tail_tree,
    sample_markov_tree,
)
from .tail_measure import (
    RhoFunctional,
    ThetaSource,
    consistency_check,
    mpd_probability,
    nu_orthant,
    nu_rho_mass,
    nu_union,
)
from .tail_tree import (
    DiscreteLaw,
    SampleMatrix,
    TailTree,
    TailTreeModel,
    build_tail_tree,
    change_root,
    exact_tail_tree_discrete,
    root_change_expectation,
    root_change_law,
    sample_tail_tree,
    theta_alpha_moment,
)
from .tree import Tree, parse_tree, path, root_tree

__version__ = "0.1.0"
