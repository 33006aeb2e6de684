"""Unit tests for vddp.transcript"""

import pytest

from vddp.errors import MalformedMessageError, ParameterError
from vddp.rng import Rng
from vddp.transcript import (
    FIAT_SHAMIR,
    INTERACTIVE,
    REPLAY,
    ChallengeSource,
    Role,
    Transcript,
    TranscriptReader,
    default_source,
)


def _write(tr: Transcript) -> int:
    tr.send_scalar("a", 5)
    tr.send_point("b", 77)
    c = tr.challenge("c")
    tr.send_flag("d", 1)
    return c


class TestChallengeSource:
    """Test challenge sources."""

    def test_unknown_mode(self):
        """Test unknown modes raise."""
        with pytest.raises(ParameterError, match="unknown challenge mode"):
            ChallengeSource(mode="telepathy")

    def test_default_from_config(self):
        """Test the configured default mode (interactive under tests)."""
        assert default_source().mode == INTERACTIVE

    def test_interactive_gets_entropy(self):
        """Test an interactive source without rng draws from the OS."""
        assert ChallengeSource(mode=INTERACTIVE).rng is not None


class TestTranscript:
    """Test writing and reading transcripts."""

    def test_fiat_shamir_round_trip(self, backend):
        """Test a reader recomputes every hash challenge."""
        tr = Transcript(backend, ChallengeSource(mode=FIAT_SHAMIR))
        c = _write(tr)
        reader = TranscriptReader.from_bytes(tr.to_bytes(), backend, mode=FIAT_SHAMIR)
        assert reader.read_scalar("a") == 5
        assert reader.read_point("b") == 77
        assert reader.challenge("c") == c
        assert reader.read_flag("d") == 1
        assert reader.exhausted

    def test_fiat_shamir_detects_altered_message(self, backend):
        """Test changing an earlier message breaks the challenge."""
        tr = Transcript(backend, ChallengeSource(mode=FIAT_SHAMIR))
        _write(tr)
        tr.messages[0].data = (6).to_bytes(32, "little")
        reader = tr.reader()
        reader.read_scalar("a")
        reader.read_point("b")
        with pytest.raises(MalformedMessageError, match="does not match transcript hash"):
            reader.challenge("c")

    def test_domain_separation(self, backend):
        """Test equal messages under different domains give different challenges."""
        a = Transcript(backend, ChallengeSource(mode=FIAT_SHAMIR), domain="one")
        b = Transcript(backend, ChallengeSource(mode=FIAT_SHAMIR), domain="two")
        assert _write(a) != _write(b)

    def test_interactive_requires_issued_challenges(self, backend):
        """Test a challenge the verifier never issued is rejected."""
        source = ChallengeSource(mode=INTERACTIVE, rng=Rng(5))
        tr = Transcript(backend, source)
        _write(tr)
        honest = TranscriptReader(tr.messages, backend, mode=INTERACTIVE, issued=list(source.issued))
        honest.read_scalar("a")
        honest.read_point("b")
        assert honest.challenge("c") == source.issued[0]

        forged = TranscriptReader(tr.messages, backend, mode=INTERACTIVE, issued=[source.issued[0] + 1])
        forged.read_scalar("a")
        forged.read_point("b")
        with pytest.raises(MalformedMessageError, match="not issued"):
            forged.challenge("c")

    def test_replay_cannot_draw(self, backend):
        """Test replay transcripts only take recorded challenges."""
        tr = Transcript(backend, ChallengeSource(mode=REPLAY))
        with pytest.raises(ParameterError, match="replay"):
            tr.challenge("c")
        tr.record_challenge("c", 9)
        assert tr.reader().challenge("c") == 9

    def test_bytes_keep_roles(self, backend):
        """Test the binary form keeps prover and verifier roles."""
        tr = Transcript(backend, ChallengeSource(mode=FIAT_SHAMIR))
        _write(tr)
        roles = [m.role for m in Transcript.messages_from_bytes(tr.to_bytes())]
        assert roles == [Role.PROVER, Role.PROVER, Role.VERIFIER, Role.PROVER]
        assert tr.size_bytes > tr.prover_bytes

    def test_truncated_bytes(self, backend):
        """Test cut-off payloads are malformed."""
        tr = Transcript(backend, ChallengeSource(mode=FIAT_SHAMIR))
        _write(tr)
        with pytest.raises(MalformedMessageError, match="truncated"):
            Transcript.messages_from_bytes(tr.to_bytes()[:-1])

    def test_unknown_role_tag(self):
        """Test role bytes other than prover/verifier are malformed."""
        with pytest.raises(MalformedMessageError, match="unknown role"):
            Transcript.messages_from_bytes(b"\x09\x00\x00\x00\x00")

    def test_missing_and_misplaced_messages(self, backend):
        """Test reading past the end or the wrong role fails."""
        tr = Transcript(backend, ChallengeSource(mode=FIAT_SHAMIR))
        tr.send_scalar("a", 1)
        reader = tr.reader()
        with pytest.raises(MalformedMessageError, match="expected verifier"):
            reader.challenge("c")
        reader = tr.reader()
        reader.read_scalar("a")
        with pytest.raises(MalformedMessageError, match="missing message"):
            reader.read_scalar("b")

    def test_non_canonical_scalar(self, backend):
        """Test scalars at or above p are malformed."""
        tr = Transcript(backend, ChallengeSource(mode=FIAT_SHAMIR))
        tr.send("a", (2 ** 256 - 1).to_bytes(32, "little"))
        with pytest.raises(MalformedMessageError, match="not canonical"):
            tr.reader().read_scalar("a")

    def test_json_dump(self, backend):
        """Test the hex dump lists every message."""
        tr = Transcript(backend, ChallengeSource(mode=FIAT_SHAMIR), domain="dump")
        _write(tr)
        data = tr.to_dict()
        assert data["domain"] == "dump"
        assert [m["label"] for m in data["messages"]] == ["a", "b", "c", "d"]
        assert '"verifier"' in tr.to_json()
