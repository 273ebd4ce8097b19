"""Simulation, verification and attack of two-party coin-tossing protocols."""

from .algebra import (
    AlgebraSpec,
    Channel,
    Instrument,
    ParamInstrument,
    Povm,
    State,
    apply_channel,
    embed_classical,
    instrument_apply,
    lift_channel,
    measure,
    pure_state,
)
from .cheat_opt import (
    CheatFamily,
    SearchConfig,
    SearchReport,
    alice_preparation_bound,
    helstrom,
    optimize_cheat,
    parameterize_unitary,
)
from .ct_protocols import (
    ClassicalProtocol,
    PureClassicalStrategy,
    build_alice_cheat,
    build_bob_cheat,
    build_dk_honest,
    decompose_pure,
    solve_winning,
)
from .dilation import (
    NaimarkForm,
    PureStrategy,
    StinespringForm,
    naimark,
    purify,
    stinespring,
    unitary_normal_form,
)
from .errors import (
    DimensionError,
    ParseError,
    ProtocolError,
    QctError,
    ValidationError,
)
from .protocol import (
    OUTCOMES,
    OutcomeDistribution,
    PayoffTable,
    Protocol,
    Strategy,
    check_correct,
    coin_payoff,
    forcing_probability,
    payoff,
    run_exact,
    sample,
    zero_sum_payoff,
)

__version__ = "0.1.0"
