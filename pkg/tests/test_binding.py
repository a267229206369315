from scpl.binding import expanded_elements, nsc, validate_imp
from scpl.features import build_configuration
from scpl.model import (Configuration, FeatureModel, ImpEntry, ImpMapping,
                        OrState, SimpleState, StateChart, Transition)


def _fm():
    return FeatureModel(
        funcs=frozenset({"R", "K", "P", "C1", "C2"}),
        root="R",
        mand=frozenset({("R", frozenset({"K"}))}),
        opt=frozenset({("R", frozenset({"P"}))}),
        or_rel=frozenset({("P", frozenset({"C1", "C2"}))}),
    )


def _sc():
    root = OrState(
        "Root",
        (SimpleState("A"), SimpleState("X", optional=True),
         SimpleState("Y", optional=True), SimpleState("Z", optional=True)),
        "A",
        (Transition("tx", "A", "X", ("e",), optional=True),
         Transition("ty", "A", "Y", ("e",), optional=True)),
    )
    return StateChart(root)


def test_validate_imp_accepts_legal_mapping():
    imp = ImpMapping.from_dict({
        "P": ImpEntry(frozenset({"X"}), frozenset({"C1"})),
        "C1": ImpEntry(frozenset({"Y", "ty"})),
        "C2": ImpEntry(frozenset({"Z"})),
    })
    assert validate_imp(_fm(), _sc(), imp) == []


def test_validate_imp_rejects_kernel_feature():
    imp = ImpMapping.from_dict({"K": ImpEntry(frozenset({"X"}))})
    out = validate_imp(_fm(), _sc(), imp)
    assert any("kernel" in v.message for v in out)


def test_validate_imp_rejects_non_optional_element():
    imp = ImpMapping.from_dict({"P": ImpEntry(frozenset({"A"}))})
    out = validate_imp(_fm(), _sc(), imp)
    assert any("not an optional machine element" in v.message for v in out)


def test_validate_imp_rejects_unknown_feature_and_include():
    imp = ImpMapping.from_dict({
        "Nope": ImpEntry(frozenset({"X"})),
        "P": ImpEntry(frozenset({"X"}), frozenset({"K", "Ghost"})),
    })
    out = validate_imp(_fm(), _sc(), imp)
    messages = " | ".join(v.message for v in out)
    assert "not in the model" in messages
    assert "kernel" in messages


def test_validate_imp_rejects_empty_entry():
    imp = ImpMapping.from_dict({"P": ImpEntry(frozenset())})
    out = validate_imp(_fm(), _sc(), imp)
    assert any("maps to nothing" in v.message for v in out)


def test_expanded_elements_follows_includes():
    imp = ImpMapping.from_dict({
        "P": ImpEntry(frozenset({"X"}), frozenset({"C1"})),
        "C1": ImpEntry(frozenset({"Y"})),
    })
    assert expanded_elements(imp, "P") == frozenset({"X", "Y"})
    assert expanded_elements(imp, "C1") == frozenset({"Y"})
    assert expanded_elements(imp, "missing") == frozenset()


def test_expanded_elements_tolerates_include_cycles():
    imp = ImpMapping.from_dict({
        "C1": ImpEntry(frozenset({"X"}), frozenset({"C2"})),
        "C2": ImpEntry(frozenset({"Y"}), frozenset({"C1"})),
    })
    assert expanded_elements(imp, "C1") == frozenset({"X", "Y"})


def test_nsc_collects_deselected_direct_elements():
    fm = _fm()
    imp = ImpMapping.from_dict({
        "P": ImpEntry(frozenset({"X"}), frozenset({"C1", "C2"})),
        "C1": ImpEntry(frozenset({"Y", "ty"})),
        "C2": ImpEntry(frozenset({"Z"})),
    })
    conf = build_configuration(fm, frozenset({"R", "K", "P", "C2"}))
    # C1 deselected: its direct elements go, the parent's survive even
    # though the parent's entry folds C1 in.
    assert nsc(fm, conf, _sc(), imp) == frozenset({"Y", "ty"})


def test_nsc_shared_elements_survive():
    fm = _fm()
    imp = ImpMapping.from_dict({
        "C1": ImpEntry(frozenset({"X", "Y"})),
        "C2": ImpEntry(frozenset({"Y", "Z"})),
    })
    conf = build_configuration(fm, frozenset({"R", "K", "P", "C2"}))
    assert nsc(fm, conf, _sc(), imp) == frozenset({"X"})


def test_nsc_empty_when_everything_selected():
    fm = _fm()
    imp = ImpMapping.from_dict({"C1": ImpEntry(frozenset({"X"}))})
    conf = build_configuration(fm, fm.funcs)
    assert nsc(fm, conf, _sc(), imp) == frozenset()


def test_nsc_golden_dataset(mp, mp_no_poly):
    fm, sc, imp = mp
    assert nsc(fm, mp_no_poly, sc, imp) == frozenset({
        "SelectPolSound",
        "TRightMultimediaType-SelectPolSound",
        "ToChoosePolSound",
        "TRightSoundType-ToChoosePolSound",
        "TLeftToChoosePolSound-SoundType",
        "TRightToChoosePolSound-PhoneFuncionalidad",
        "MessagesState",
        "TMessage-MainDisplay-IncomingMess",
    })
