"""Almost-sure control-flow synthesis from libraries of probabilistic components."""

from .model import (
    Component,
    Composer,
    Dpw,
    ExitControlRelation,
    IndexFunction,
    Library,
    MemorylessStrategy,
    convert_min_even_priorities,
    is_compatible,
    pad_exits,
    validate_composer,
    validate_index,
    validate_library,
    validate_relation,
)
from .mdp import (
    EndComponent,
    LabelTriple,
    McView,
    SupportGraph,
    component_labels,
    environment_can_win,
    environment_wins_memoryless,
    ergodic_sets,
    even_sink_feasible,
    induced_graph,
    is_odd_sink,
    label_member,
    labels,
    remove_odd_sinks,
    satisfies_index,
)
from .composition import (
    AugmentedLibrary,
    Composition,
    TreeGen,
    augment_composer,
    augment_library,
    compose,
    hide,
    product_with_monitor,
    same_tree,
    tree_of_choice,
    tree_of_composer,
    wide,
    xray,
)
from .automata import (
    Acceptance,
    ChoiceFunction,
    TreeAutomaton,
    build_rank_nbt,
    build_safety,
    choice_ranks,
    dualize,
    has_rank,
    intersect,
    membership,
    narrow,
    project_labels,
    union,
)
from .games import GameArena, ParitySolution, solve_parity_game
from .emptiness import RankFunction, nbt_emptiness, uct_emptiness, uct_to_nbt
from .synthesis import (
    SynthesisResult,
    synth_dpw,
    synth_embedded,
    verify_dpw,
    verify_embedded,
)
from .oracle import (
    bounded_composer_search,
    enumerate_choice_functions,
    enumerate_composers,
    enumerate_pure_memoryless,
    enumerate_supports,
)

__version__ = "0.1.0"
