"""Transducers on powers of Cantor space and the outer calculus of dV_n.

The package is organized bottom-up:

- :mod:`dvn.words` -- word tuples, cones, clopen sets, prefix codes;
- :mod:`dvn.machine` -- finite transducer diagrams and lazy machine handles,
  with composition, minimization, images, injectivity, synchronization;
- :mod:`dvn.homeo` -- prefix-exchange homeomorphisms and the machines they
  induce;
- :mod:`dvn.outer` -- canonical core elements, their product, the coordinate
  homomorphism and the product decomposition;
- :mod:`dvn.enumerate` -- exhaustive enumeration and census of small cores;
- :mod:`dvn.catalog` -- named example machines, exchanges and codes;
- :mod:`dvn.cli` -- the ``dvn`` command-line interface.

Everything composes left to right: ``compose(f, g)`` and ``multiply(A, B)``
mean "f then g" and "A then B", and functions act on the right of points.
"""

from .words import (
    AlphabetMismatch,
    CodeError,
    ConeSet,
    DvnError,
    Gap,
    Overlap,
    PrefixCode,
    PrefixViolation,
    WordD,
    code_size_realizable,
    lcp_all,
    squares,
    validate_prefix_code,
)

from .machine import (
    BoundExceeded,
    CapExceeded,
    CoherenceError,
    ComposedHandle,
    Diagram,
    IncoherentOutput,
    IncoherentTransition,
    InjectivityReport,
    MachineHandle,
    NotSynchronizing,
    ProductHandle,
    behavior_equal,
    complete_response,
    compose,
    core,
    distinct_states_lower_bound,
    freeze_handle,
    identity_diagram,
    image,
    image_all,
    injectivity,
    is_complete_response,
    is_nondegenerate,
    is_synchronizing,
    minimal_for_homeomorphism,
    minimize,
    product,
    strong_iso,
    synchronizing_level,
)

from .homeo import (
    LazyPrefixExchangeMachine,
    PairingInverseHandle,
    PrefixExchange,
    SignatureObstruction,
    Undetermined,
    bakers,
    bakers_exchange,
    compose_exchanges,
    identity_exchange,
    inverse_digit_pairing_D,
    is_dvn_member,
    machine_of,
    realize,
)

from .outer import (
    CoreElement,
    DecompositionMismatch,
    Inconsistent,
    NotFound,
    NotInvertible,
    canonicalize,
    decompose,
    find_inverse,
    identity_core,
    in_dK,
    is_identity,
    multiply,
    permutation_core,
    psi,
    recompose,
    sig,
    wreath_coordinates,
)

from .enumerate import (
    FILTER_ORDER,
    EnumerationSpec,
    SpecTooLarge,
    census,
    enumerate_elements,
    passes_filters,
)

__all__ = [
    "AlphabetMismatch",
    "CodeError",
    "ConeSet",
    "DvnError",
    "Gap",
    "Overlap",
    "PrefixCode",
    "PrefixViolation",
    "WordD",
    "code_size_realizable",
    "lcp_all",
    "squares",
    "validate_prefix_code",
    "BoundExceeded",
    "CapExceeded",
    "CoherenceError",
    "ComposedHandle",
    "Diagram",
    "IncoherentOutput",
    "IncoherentTransition",
    "InjectivityReport",
    "MachineHandle",
    "NotSynchronizing",
    "ProductHandle",
    "behavior_equal",
    "complete_response",
    "compose",
    "core",
    "distinct_states_lower_bound",
    "freeze_handle",
    "identity_diagram",
    "image",
    "image_all",
    "injectivity",
    "is_complete_response",
    "is_nondegenerate",
    "is_synchronizing",
    "minimal_for_homeomorphism",
    "minimize",
    "product",
    "strong_iso",
    "synchronizing_level",
    "LazyPrefixExchangeMachine",
    "PairingInverseHandle",
    "PrefixExchange",
    "SignatureObstruction",
    "Undetermined",
    "bakers",
    "bakers_exchange",
    "compose_exchanges",
    "identity_exchange",
    "inverse_digit_pairing_D",
    "is_dvn_member",
    "machine_of",
    "realize",
    "CoreElement",
    "DecompositionMismatch",
    "Inconsistent",
    "NotFound",
    "NotInvertible",
    "canonicalize",
    "decompose",
    "find_inverse",
    "identity_core",
    "in_dK",
    "is_identity",
    "multiply",
    "permutation_core",
    "psi",
    "recompose",
    "sig",
    "wreath_coordinates",
    "FILTER_ORDER",
    "EnumerationSpec",
    "SpecTooLarge",
    "census",
    "enumerate_elements",
    "passes_filters",
]

__version__ = "0.1.0"
