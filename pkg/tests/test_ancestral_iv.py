import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aivip.ancestral_iv import (
    IvRoles,
    VisibleEdgeError,
    conditioning_set_mag,
    conditioning_set_pag,
    instrumentalizes_mag,
    is_ancestral_iv_dag,
    is_conditional_iv,
    is_standard_iv,
    manipulate,
)
from aivip.ci import DSepOracle
from aivip.graph import GraphError, Mark, MixedGraph, bidirected, directed
from aivip.learner import learn_pag
from aivip.projection import dag_to_mag, pag_oracle
from aivip.separation import d_separated, m_separated
from aivip.simulation import true_dag

T, A, C = Mark.TAIL, Mark.ARROW, Mark.CIRCLE
ROLES = IvRoles("W", "Y", "S")


def test_iv_standard_iv(iv_dag):
    assert is_standard_iv(iv_dag, ROLES)


def test_common_cause_is_not_standard_iv(iv_dag):
    assert not is_standard_iv(iv_dag, IvRoles("W", "Y", "U"))


def test_roles_must_differ():
    with pytest.raises(GraphError):
        IvRoles("W", "Y", "Y")


def test_group1_conditional_iv(group1_core):
    dag = group1_core.dag
    assert is_conditional_iv(dag, ROLES, ["X3"], group1_core.latent)
    assert not is_conditional_iv(dag, ROLES, ["X1", "X3"], group1_core.latent)


def test_conditioning_on_outcome_rejected(group1_core):
    with pytest.raises(GraphError):
        is_conditional_iv(group1_core.dag, ROLES, ["Y"])


def test_conditioning_on_latent_rejected(group1_core):
    with pytest.raises(GraphError, match="latent"):
        is_conditional_iv(group1_core.dag, ROLES, ["U2"], group1_core.latent)


def test_ancestral_iv_examples(group1_core, iv_dag):
    assert is_ancestral_iv_dag(group1_core.dag, ROLES, ["X3"])
    assert not is_ancestral_iv_dag(group1_core.dag, ROLES, ["X2"])
    assert is_ancestral_iv_dag(iv_dag, ROLES, [])


def test_paper_literal_variant_breaks_x3():
    spec = true_dag("I", "paper_literal", noise_covariates=0)
    assert not is_ancestral_iv_dag(spec.dag, ROLES, ["X3"])
    cut = spec.dag.without_edge("W", "Y")
    res = d_separated(cut, "S", "Y", ["X3"])
    assert not res.separated and res.witness[:3] == ("S", "X1", "Y")


# -- manipulation and conditioning sets ------------------------------------------


def test_manipulate_confounded_iv(iv_mag):
    mm = manipulate(iv_mag, ROLES)
    assert mm == MixedGraph(["S", "W", "Y"], directed(("S", "W")) + bidirected(("W", "Y")))


def test_manipulate_without_s_y_edge():
    # in a MAG, S *-> W with S, Y non-adjacent makes W -> Y visible, so use a PAG
    g = MixedGraph(["S", "W", "Y"], [("S", C, C, "W"), ("W", C, A, "Y")])
    mm = manipulate(g, ROLES)
    assert mm.edge("W", "Y") == (A, A)
    assert mm.edge("S", "W") == (C, C)
    assert mm.num_edges() == g.num_edges()


def test_manipulate_rejects_visible_edge():
    g = MixedGraph(["K", "W", "Y", "S"], directed(("K", "W"), ("W", "Y"), ("S", "W")))
    with pytest.raises(VisibleEdgeError):
        manipulate(g, ROLES)
    with pytest.raises(VisibleEdgeError):
        conditioning_set_mag(g, ROLES)


def test_manipulate_rejects_wrong_direction():
    g = MixedGraph(["S", "W", "Y"], directed(("S", "W"), ("Y", "W")))
    with pytest.raises(GraphError, match="cause"):
        manipulate(g, ROLES)


def test_manipulate_needs_treatment_edge():
    g = MixedGraph(["S", "W", "Y"], directed(("S", "W")))
    with pytest.raises(GraphError, match="no edge"):
        manipulate(g, ROLES)


def test_iv_conditioning_set_mag_empty(iv_mag):
    assert conditioning_set_mag(iv_mag, ROLES) == ()


def test_group1_conditioning_set_mag(group1_core):
    assert conditioning_set_mag(dag_to_mag(group1_core), ROLES) == ("X3",)


def test_group_pags_give_x3(group1_core, group2_core):
    for spec in (group1_core, group2_core):
        pag = learn_pag(DSepOracle(spec.dag, spec.observed))
        assert conditioning_set_pag(pag, ROLES) == ("X3",)


def test_iv_pag_conditioning_set_empty(iv_mag):
    assert conditioning_set_pag(pag_oracle(iv_mag), ROLES) == ()


def test_pag_with_definitely_visible_edge():
    p = MixedGraph(["K", "W", "Y", "S"], directed(("K", "W"), ("W", "Y")) + [("S", C, A, "W")])
    with pytest.raises(VisibleEdgeError):
        conditioning_set_pag(p, ROLES)


def test_conditioning_set_mag_rejects_pag(iv_mag):
    with pytest.raises(GraphError):
        conditioning_set_mag(pag_oracle(iv_mag), ROLES)


# -- properties ------------------------------------------------------------------


def _random_iv_dag(rng, other_causes_of_w=True):
    """Confounded W -> Y with an instrument S and random covariates X0..Xk."""
    k = int(rng.integers(1, 4))
    xs = [f"X{i}" for i in range(k)]
    nodes = ["S", "W", "Y", "U"] + xs + ["L"]
    pairs = [("S", "W"), ("W", "Y"), ("U", "W"), ("U", "Y")]
    for x in xs:
        for t in ("S", "Y"):
            if rng.random() < 0.4:
                pairs.append((x, t))
        if rng.random() < 0.3:
            pairs.append(("L", x))
    if rng.random() < 0.5:
        pairs += [("L", "S")]
    if other_causes_of_w and rng.random() < 0.5:
        pairs.append((xs[0], "W"))
    dag = MixedGraph(nodes, directed(*pairs))
    return dag, ("U", "L")


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_dag_level_iv_carries_to_mag(seed):
    # holds when S is the only observed parent of W; see the next test
    rng = np.random.default_rng(seed)
    dag, latent = _random_iv_dag(rng, other_causes_of_w=False)
    obs = [v for v in dag.nodes if v not in latent]
    xs = [v for v in obs if v.startswith("X")]
    mag = dag_to_mag(dag, latent)
    for r in range(len(xs) + 1):
        for mask in range(2 ** len(xs)):
            z = [x for i, x in enumerate(xs) if mask >> i & 1]
            if len(z) != r or not is_ancestral_iv_dag(dag, ROLES, z, latent):
                continue
            assert not m_separated(mag, "S", "W", z).separated
            try:
                mm = manipulate(mag, ROLES)
            except VisibleEdgeError:
                continue
            assert m_separated(mm, "S", "Y", z).separated


def test_shared_cause_of_s_and_w_breaks_mag_transfer():
    # X0 -> S, X0 -> W, W <- U -> Y: the empty set works in the DAG, but the
    # inducing path X0 -> W <- U -> Y puts X0 -> Y into the MAG
    dag = MixedGraph(["S", "W", "Y", "U", "X0"],
                     directed(("S", "W"), ("W", "Y"), ("U", "W"), ("U", "Y"), ("X0", "S"), ("X0", "W")))
    assert is_ancestral_iv_dag(dag, ROLES, [], ["U"])
    mag = dag_to_mag(dag, ["U"])
    assert mag.edge("X0", "Y") == (T, A)
    mm = manipulate(mag, ROLES)
    assert not m_separated(mm, "S", "Y", []).separated
    assert m_separated(mm, "S", "Y", ["X0"]).separated
    assert conditioning_set_mag(mag, ROLES) == ("X0",)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_mag_conditioning_set_instrumentalizes(seed):
    rng = np.random.default_rng(seed)
    dag, latent = _random_iv_dag(rng)
    mag = dag_to_mag(dag, latent)
    try:
        z = conditioning_set_mag(mag, ROLES)
    except VisibleEdgeError:
        return
    assert not {"W", "S", "Y"} & set(z)
    assert m_separated(manipulate(mag, ROLES), "S", "Y", z).separated
    assert instrumentalizes_mag(mag, ROLES, z) == (not m_separated(mag, "S", "W", z).separated)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_pag_conditioning_set_valid_in_true_dag(seed):
    rng = np.random.default_rng(seed)
    dag, latent = _random_iv_dag(rng)
    obs = [v for v in dag.nodes if v not in latent]
    xs = [v for v in obs if v.startswith("X")]
    # only graphs that admit some ancestral IV set
    if not any(is_ancestral_iv_dag(dag, ROLES, [x for i, x in enumerate(xs) if m >> i & 1], latent)
               for m in range(2 ** len(xs))):
        return
    pag = learn_pag(DSepOracle(dag, obs))
    try:
        z = conditioning_set_pag(pag, ROLES)
    except (VisibleEdgeError, GraphError):
        return
    assert not {"W", "S", "Y"} & set(z)
    assert d_separated(dag.without_edge("W", "Y"), "S", "Y", z).separated
