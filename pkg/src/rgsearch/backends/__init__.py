from .base import (
    MAX_ROLLOUT_STEPS,
    BackendError,
    BackendUnavailable,
    FormatError,
    MissingProbabilities,
    NonTerminating,
    PolicyBackend,
    PolicyCapabilities,
    RewardBackend,
    RewardCapabilities,
    SolutionPrefix,
    generate_steps,
    normalize_reward,
    reward_score,
    rollout,
    score_solution,
)
from .http import API_KEY_ENV, ChatClient, HttpBackendConfig, HttpPolicyBackend, HttpRewardBackend
from .prompts import POLICY_TEMPLATE, REWARD_MODEL_TEMPLATE, render_policy_prompt, render_rm_prompt
from .scripted import ScriptedPolicy, ScriptedReward, ScriptedWorld

__all__ = [
    "API_KEY_ENV",
    "BackendError",
    "BackendUnavailable",
    "ChatClient",
    "FormatError",
    "HttpBackendConfig",
    "HttpPolicyBackend",
    "HttpRewardBackend",
    "MAX_ROLLOUT_STEPS",
    "MissingProbabilities",
    "NonTerminating",
    "POLICY_TEMPLATE",
    "PolicyBackend",
    "PolicyCapabilities",
    "REWARD_MODEL_TEMPLATE",
    "RewardBackend",
    "RewardCapabilities",
    "ScriptedPolicy",
    "ScriptedReward",
    "ScriptedWorld",
    "SolutionPrefix",
    "generate_steps",
    "normalize_reward",
    "render_policy_prompt",
    "render_rm_prompt",
    "reward_score",
    "rollout",
    "score_solution",
]
