"""HTTP policy and reward backends for OpenAI-compatible inference servers.

Requests go to ``{base_url}/v1/chat/completions`` with bearer auth read
from the environment (STILL_API_KEY by default). Reward scoring reads the
Yes/No probabilities from the top log-probabilities of the first generated
position; if neither token appears there, scoring fails loudly rather than
defaulting.
"""

from __future__ import annotations

import logging
import math
import os
import threading
import time
from dataclasses import dataclass
from typing import Any

import requests

from ..core.types import CandidateSolution, Problem, Step
from ..textops.solution import extract_boxed, format_solution, has_final_answer, parse_solution
from .base import (
    MAX_ROLLOUT_STEPS,
    BackendUnavailable,
    FormatError,
    MissingProbabilities,
    NonTerminating,
    PolicyBackend,
    PolicyCapabilities,
    RewardBackend,
    SolutionPrefix,
)
from .prompts import render_policy_prompt, render_rm_prompt

log = logging.getLogger("rgsearch.backends.http")

API_KEY_ENV = "STILL_API_KEY"

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


@dataclass(frozen=True)
class HttpBackendConfig:
    base_url: str
    model: str
    temperature: float = 0.7
    top_p: float = 1.0
    timeout_s: float = 60.0
    max_retries: int = 3
    concurrency_limit: int = 4
    retry_backoff_s: float = 0.5
    max_tokens: int = 1024
    top_logprobs: int = 20
    api_key_env: str = API_KEY_ENV

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError("top_p must lie in (0, 1]")
        if self.concurrency_limit < 1:
            raise ValueError("concurrency_limit must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        return {
            "base_url": self.base_url,
            "model": self.model,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "timeout_s": self.timeout_s,
            "max_retries": self.max_retries,
            "concurrency_limit": self.concurrency_limit,
            "retry_backoff_s": self.retry_backoff_s,
            "max_tokens": self.max_tokens,
            "top_logprobs": self.top_logprobs,
            "api_key_env": self.api_key_env,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> HttpBackendConfig:
        defaults = cls(base_url=d["base_url"], model=d["model"])
        return cls(
            base_url=d["base_url"],
            model=d["model"],
            temperature=d.get("temperature", defaults.temperature),
            top_p=d.get("top_p", defaults.top_p),
            timeout_s=d.get("timeout_s", defaults.timeout_s),
            max_retries=d.get("max_retries", defaults.max_retries),
            concurrency_limit=d.get("concurrency_limit", defaults.concurrency_limit),
            retry_backoff_s=d.get("retry_backoff_s", defaults.retry_backoff_s),
            max_tokens=d.get("max_tokens", defaults.max_tokens),
            top_logprobs=d.get("top_logprobs", defaults.top_logprobs),
            api_key_env=d.get("api_key_env", defaults.api_key_env),
        )


class ChatClient:
    """Thin chat-completions client with retries and a concurrency cap."""

    def __init__(self, config: HttpBackendConfig, session: requests.Session | None = None) -> None:
        self.config = config
        self.session = session or requests.Session()
        self._gate = threading.Semaphore(config.concurrency_limit)

    def chat(self, messages: list[dict[str, str]], **overrides: Any) -> dict[str, Any]:
        cfg = self.config
        payload: dict[str, Any] = {
            "model": cfg.model,
            "messages": messages,
            "temperature": cfg.temperature,
            "top_p": cfg.top_p,
            "max_tokens": cfg.max_tokens,
        }
        payload.update(overrides)
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(cfg.api_key_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        url = cfg.base_url.rstrip("/") + "/v1/chat/completions"

        last_error: Exception | None = None
        for attempt in range(cfg.max_retries):
            try:
                with self._gate:
                    response = self.session.post(url, json=payload, headers=headers, timeout=cfg.timeout_s)
            except requests.RequestException as exc:
                last_error = exc
                log.warning("chat request failed (attempt %d): %s", attempt + 1, exc)
            else:
                if response.status_code == 200:
                    return response.json()
                last_error = BackendUnavailable(f"server returned {response.status_code}: {response.text[:200]}")
                if response.status_code not in _RETRYABLE_STATUS:
                    raise last_error
                log.warning("chat request got %d (attempt %d)", response.status_code, attempt + 1)
            if attempt + 1 < cfg.max_retries:
                time.sleep(cfg.retry_backoff_s * (2 ** attempt))
        raise BackendUnavailable(f"chat request failed after {cfg.max_retries} attempts: {last_error}")


def _completion_texts(response: dict[str, Any]) -> list[str]:
    try:
        return [choice["message"]["content"] for choice in response["choices"]]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed chat response: {exc}") from exc


class HttpPolicyBackend(PolicyBackend):
    """Step generation and rollouts against a chat-completions server."""

    def __init__(self, config: HttpBackendConfig, session: requests.Session | None = None) -> None:
        self.client = ChatClient(config, session=session)
        self.capabilities = PolicyCapabilities(
            supports_step_generation=True, supports_rollout=True, max_batch=config.concurrency_limit
        )

    def _messages(self, prefix: SolutionPrefix) -> list[dict[str, str]]:
        prompt = render_policy_prompt(prefix.problem)
        prefix_text = prefix.text()
        if prefix_text:
            prompt = f"{prompt}\n\n{prefix_text}"
        return [{"role": "user", "content": prompt}]

    def _sample(self, prefix: SolutionPrefix, n: int) -> list[str]:
        try:
            response = self.client.chat(self._messages(prefix), n=n)
            texts = _completion_texts(response)
        except FormatError:
            raise
        if len(texts) == n:
            return texts
        if len(texts) == 1 and n > 1:
            # Server ignored n; fall back to sequential sampling.
            for _ in range(n - 1):
                texts.extend(_completion_texts(self.client.chat(self._messages(prefix), n=1)))
        if len(texts) != n:
            raise FormatError(f"requested {n} completions, server produced {len(texts)}")
        return texts

    def generate_steps(self, prefix: SolutionPrefix, k: int) -> list[Step]:
        steps: list[Step] = []
        texts = self._sample(prefix, k)
        for text in texts:
            step = _first_step_block(text, next_index=prefix.depth + 1)
            if step is None:
                # One regeneration attempt before giving up on this slot.
                retry_text = self._sample(prefix, 1)[0]
                step = _first_step_block(retry_text, next_index=prefix.depth + 1)
            if step is None:
                raise FormatError("generation carried no parseable step block")
            steps.append(step)
        return steps

    def rollout(self, prefix: SolutionPrefix) -> CandidateSolution:
        prefix_text = prefix.text()
        if has_final_answer(prefix_text):
            return _close_terminal_prefix(prefix)
        for attempt in range(2):
            completion = self._sample(prefix, 1)[0].strip()
            full_text = f"{prefix_text}\n\n{completion}" if prefix_text else completion
            try:
                solution = parse_solution(full_text, problem_id=prefix.problem.id)
            except ValueError:
                continue
            if solution.final_answer is None:
                continue
            if len(solution.steps) - prefix.depth > MAX_ROLLOUT_STEPS:
                raise NonTerminating(f"rollout exceeded {MAX_ROLLOUT_STEPS} generated steps")
            return solution
        raise FormatError("rollout never produced a final-answer block")


class HttpRewardBackend(RewardBackend):
    """Yes/No assessment probabilities from first-position top logprobs."""

    def __init__(self, config: HttpBackendConfig, session: requests.Session | None = None) -> None:
        self.client = ChatClient(config, session=session)

    def assess(self, problem: Problem, solution: CandidateSolution) -> tuple[float, float]:
        prompt = render_rm_prompt(problem, solution)
        response = self.client.chat(
            [{"role": "user", "content": prompt}],
            max_tokens=1,
            logprobs=True,
            top_logprobs=self.client.config.top_logprobs,
        )
        try:
            entries = response["choices"][0]["logprobs"]["content"][0]["top_logprobs"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MissingProbabilities(f"server gave no token log-probabilities: {exc}") from exc
        p_yes = 0.0
        p_no = 0.0
        seen = False
        for entry in entries:
            token = str(entry.get("token", "")).strip()
            if token == "Yes":
                p_yes += math.exp(entry["logprob"])
                seen = True
            elif token == "No":
                p_no += math.exp(entry["logprob"])
                seen = True
        if not seen:
            raise MissingProbabilities("neither Yes nor No appeared in the top logprobs")
        return min(p_yes, 1.0), min(p_no, 1.0)


def _first_step_block(text: str, next_index: int) -> Step | None:
    """Cut the first step (or final-answer) block out of a generation.

    A leading final-answer block becomes a terminal step whose body carries
    the boxed answer, which is how the tree marks termination.
    """
    try:
        parsed = parse_solution(text.strip())
    except ValueError:
        return None
    if parsed.steps:
        first = parsed.steps[0]
        return Step(index=next_index, title=first.title, body=first.body)
    if parsed.final_answer is not None:
        return Step(index=next_index, title="Final Answer", body=f"\\boxed{{{parsed.final_answer}}}")
    return None


def _close_terminal_prefix(prefix: SolutionPrefix) -> CandidateSolution:
    """Finish an already-terminal prefix without any generation."""
    answer = extract_boxed(prefix.text())
    solution = CandidateSolution(
        problem_id=prefix.problem.id,
        raw_text="",
        rephrasing=prefix.rephrasing,
        steps=prefix.steps,
        final_answer=answer,
    )
    return CandidateSolution(
        problem_id=solution.problem_id,
        raw_text=format_solution(solution),
        rephrasing=solution.rephrasing,
        steps=solution.steps,
        final_answer=solution.final_answer,
    )
