"""Finite-horizon trust games with certified reward shaping."""

from ._core import (
    BoundReport,
    ConfigError,
    GameSpec,
    LinearPotential,
    LossBoundReport,
    McEstimate,
    PolicyRule,
    RolloutStats,
    SarConfig,
    SolveResult,
    StageOutcome,
    ThreatMode,
    TrustParams,
    TrustState,
    ValueTable,
    __version__,
    build_sar_game,
    compliance_probability,
    config_schema_json,
    default_config_json,
    design_potential,
    evaluate_policy,
    expected_stage_outcome,
    expected_trust,
    final_state_distribution,
    mc_rollout_stats,
    myopic_indifference_threshold,
    performance_loss_check,
    reachable_states,
    sar_shaping_coefficient,
    shape_game,
    shaping_reward,
    simulate_jsonl,
    solve_optimal,
    stage_q_values,
    sweep_csv,
    telescoping_check,
    update_trust,
    verify_report,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
