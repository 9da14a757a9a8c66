"""
Client for OpenAI-compatible chat-completion and embedding endpoints.
"""
import logging
import os
import time
from typing import Any, Callable, Dict, List, Optional

import requests

from casecontext.api.models import ChatRequest
from casecontext.errors import GatewayError

logger = logging.getLogger(__name__)

TRANSIENT_STATUSES = frozenset({429, 500, 502, 503, 504})


class ChatApiClient:
    """
    Client for an OpenAI-compatible backend.

    Speaks ``POST /v1/chat/completions`` and ``POST /v1/embeddings`` with
    bearer-token auth. Connection errors, timeouts, 429 and 5xx responses are
    retried with exponential backoff; other failures surface immediately.
    """

    BASE_URL = "https://api.openai.com"

    def __init__(
        self,
        base_url: Optional[str] = None,
        api_token: Optional[str] = None,
        chat_model: str = "gpt-5",
        embedding_model: str = "Qwen3-Embedding-8B",
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff_seconds: float = 1.0,
        session: Optional[requests.Session] = None,
        sleep: Callable[[float], None] = time.sleep
    ):
        """
        Initialize the client.

        Args:
            base_url (Optional[str]): Backend root; ``CASECONTEXT_BASE_URL`` or
                ``BASE_URL`` when not given.
            api_token (Optional[str]): Bearer token; ``CASECONTEXT_API_TOKEN`` when not given.
            chat_model (str): Model name for chat completions.
            embedding_model (str): Model name for embeddings.
            timeout (float): Per-request timeout in seconds.
            max_retries (int): Retries after the first attempt for transient failures.
            backoff_seconds (float): Base delay, doubled on every retry.
            session (Optional[requests.Session]): Session to reuse.
            sleep (Callable[[float], None]): Delay function.
        """
        self.base_url = (base_url or os.getenv("CASECONTEXT_BASE_URL") or self.BASE_URL).rstrip("/")
        self.chat_model = chat_model
        self.embedding_model = embedding_model
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_seconds = backoff_seconds
        self._sleep = sleep

        self.session = session or requests.Session()
        self.session.headers.update({
            "Content-Type": "application/json",
            "Accept": "application/json"
        })
        token = api_token or os.getenv("CASECONTEXT_API_TOKEN")
        if token:
            self.session.headers["Authorization"] = f"Bearer {token}"

    def _post(self, path: str, payload: Dict[str, Any]) -> Dict[str, Any]:
        """
        POST a JSON payload, retrying transient failures.

        Args:
            path (str): Endpoint path below the base URL.
            payload (Dict[str, Any]): Request body.

        Returns:
            Dict[str, Any]: Decoded JSON response.
        """
        url = f"{self.base_url}{path}"
        last_error: Optional[GatewayError] = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                delay = self.backoff_seconds * 2 ** (attempt - 1)
                logger.debug("Retrying %s in %.2fs (attempt %d)", url, delay, attempt + 1)
                self._sleep(delay)
            try:
                response = self.session.post(url, json=payload, timeout=self.timeout)
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = GatewayError(f"transport failure calling {url}: {exc}")
                continue

            if response.status_code in TRANSIENT_STATUSES:
                last_error = GatewayError(f"transient backend error from {url}", response.status_code)
                continue
            try:
                response.raise_for_status()
            except requests.HTTPError as exc:
                raise GatewayError(f"backend error from {url}: {response.text[:200]}", response.status_code) from exc

            data = response.json()
            if isinstance(data, dict) and "error" in data:
                raise GatewayError(f"backend error payload from {url}: {data['error']}", response.status_code)
            return data

        raise GatewayError(
            f"retries exhausted after {self.max_retries + 1} attempts: {last_error}",
            last_error.status if last_error else None
        )

    def chat(self, request: ChatRequest) -> str:
        """
        Request a chat completion.

        Args:
            request (ChatRequest): Prompts and decoding parameters.

        Returns:
            str: The completion text.
        """
        messages = []
        if request.system_prompt:
            messages.append({"role": "system", "content": request.system_prompt})
        messages.append({"role": "user", "content": request.user_prompt})
        data = self._post("/v1/chat/completions", {
            "model": self.chat_model,
            "messages": messages,
            "temperature": request.decode_params.temperature,
            "max_tokens": request.decode_params.max_output_tokens,
        })
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"malformed chat response: {exc!r}") from exc

    def embed(self, texts: List[str]) -> List[List[float]]:
        """
        Embed a batch of texts.

        Args:
            texts (List[str]): Texts to embed.

        Returns:
            List[List[float]]: One vector per text, in input order.
        """
        data = self._post("/v1/embeddings", {"model": self.embedding_model, "input": texts})
        try:
            items = sorted(data["data"], key=lambda item: item.get("index", 0))
            vectors = [list(map(float, item["embedding"])) for item in items]
        except (KeyError, TypeError, ValueError) as exc:
            raise GatewayError(f"malformed embedding response: {exc!r}") from exc
        if len(vectors) != len(texts):
            raise GatewayError(f"expected {len(texts)} embeddings, got {len(vectors)}")
        return vectors
