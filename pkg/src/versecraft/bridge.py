"""External model bridge: masked logits over a line-delimited byte stream.

Protocol, from the bridge process's side:

  1. handshake: the bridge sends its vocabulary in the vocabulary file
     format (one surface per line, optional ``#mask`` header), terminated
     by one blank line;
  2. requests:  one line ``MASKED <position> <id id id ...>``;
  3. responses: one line of |V| space-separated decimal floats (logits;
     ``-inf`` permitted).

Any malformed line on either side aborts the session. ``BridgeProvider``
is the client; ``serve_bridge`` plus the module entry point expose a
tabular model as a bridge for tests and demos.
"""

from __future__ import annotations

import argparse
import shlex
import subprocess
import sys
from typing import IO

import numpy as np

from .errors import BadPositionError, ProviderFailureError
from .providers import load_tabular_model
from .vocabulary import (
    TokenSequence,
    Vocabulary,
    format_vocabulary,
    load_vocabulary,
    parse_vocabulary_text,
)


class BridgeProvider:
    """Client half of the bridge protocol; usable wherever a provider is."""

    def __init__(self, reader: IO[str], writer: IO[str], closer=None):
        self._reader = reader
        self._writer = writer
        self._closer = closer
        self._vocabulary = self._read_handshake()

    @classmethod
    def spawn(cls, command: str | list[str]) -> "BridgeProvider":
        """Start ``command`` and speak the protocol over its stdio."""
        argv = shlex.split(command) if isinstance(command, str) else command
        try:
            proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ProviderFailureError(f"cannot start bridge {argv!r}: {exc}") from exc

        def closer():
            proc.stdin.close()
            proc.terminate()
            proc.wait(timeout=5)

        return cls(proc.stdout, proc.stdin, closer=closer)

    @property
    def vocabulary(self) -> Vocabulary:
        return self._vocabulary

    def _read_handshake(self) -> Vocabulary:
        lines: list[str] = []
        while True:
            line = self._reader.readline()
            if not line:
                raise ProviderFailureError("bridge closed during handshake")
            if line.strip() == "":
                break
            lines.append(line.rstrip("\n"))
        try:
            return parse_vocabulary_text("\n".join(lines))
        except Exception as exc:
            raise ProviderFailureError(f"bad bridge vocabulary: {exc}") from exc

    def masked_logits(self, seq: TokenSequence, position: int) -> np.ndarray:
        if not (0 <= position < seq.length):
            raise BadPositionError(f"position {position} out of range 0..{seq.length - 1}")
        request = f"MASKED {position} {' '.join(str(i) for i in seq.ids)}\n"
        try:
            self._writer.write(request)
            self._writer.flush()
        except (OSError, ValueError) as exc:
            raise ProviderFailureError(f"bridge write failed: {exc}") from exc
        line = self._reader.readline()
        if not line:
            raise ProviderFailureError("bridge closed mid-session")
        parts = line.split()
        if len(parts) != len(self._vocabulary):
            raise ProviderFailureError(
                f"expected {len(self._vocabulary)} logits, got {len(parts)}"
            )
        try:
            return np.array([float(p) for p in parts])
        except ValueError as exc:
            raise ProviderFailureError(f"malformed logit line: {line!r}") from exc

    def close(self) -> None:
        if self._closer is not None:
            self._closer()
            self._closer = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def serve_bridge(provider, instream: IO[str], outstream: IO[str]) -> None:
    """Server half: answer MASKED requests for any provider until EOF.

    A malformed request aborts the session, mirroring the client contract.
    """
    vocab = provider.vocabulary
    outstream.write(format_vocabulary(vocab))
    outstream.write("\n")
    outstream.flush()
    for line in instream:
        parts = line.split()
        if len(parts) < 3 or parts[0] != "MASKED":
            return
        try:
            position = int(parts[1])
            ids = tuple(int(p) for p in parts[2:])
            seq = TokenSequence(vocab, ids)
            logits = provider.masked_logits(seq, position)
        except Exception:
            return
        outstream.write(" ".join(repr(float(x)) for x in logits) + "\n")
        outstream.flush()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="versecraft.bridge",
        description="Serve a tabular model over the bridge protocol on stdio.",
    )
    parser.add_argument("table", help="tabular model file")
    parser.add_argument("--vocab", required=True, help="vocabulary file")
    args = parser.parse_args(argv)
    vocab = load_vocabulary(args.vocab)
    model = load_tabular_model(args.table, vocab)
    serve_bridge(model, sys.stdin, sys.stdout)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
