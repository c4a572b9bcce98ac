"""Completion gateway: canonical keys, scripted/replay modes, record safety."""

import json

import pytest

from sforge.errors import CassetteConflict, ReplayMiss, ScriptExhausted
from sforge.gateway import (ChatMessage, ChatRequest, LlmGateway,
                            canonicalize, load_cassette, request_key)


def req(text="hello", system="be brief", attachments=()):
    return ChatRequest(messages=(ChatMessage("system", system),
                                 ChatMessage("user", text)),
                       attachments=tuple(attachments))


class TestCanonicalize:
    def test_identical_requests_share_bytes(self):
        assert canonicalize(req()) == canonicalize(req())

    def test_text_difference_changes_key(self):
        assert request_key(req("a")) != request_key(req("b"))

    def test_attachment_difference_changes_key(self):
        assert request_key(req(attachments=("sha1",))) != request_key(
            req(attachments=("sha2",)))

    def test_key_is_sha256_hex(self):
        assert len(request_key(req())) == 64

    def test_requires_at_least_one_message(self):
        with pytest.raises(ValueError):
            ChatRequest(messages=())


class TestScripted:
    def test_dispenses_in_order_then_exhausts(self):
        gw = LlmGateway("scripted", script=["one", "two", "three", "four"])
        assert [gw.complete(req()) for _ in range(4)] == ["one", "two",
                                                          "three", "four"]
        with pytest.raises(ScriptExhausted):
            gw.complete(req())


class TestRecordReplay:
    def test_round_trip_reproduces_responses(self, tmp_path):
        cassette = tmp_path / "c.jsonl"
        responses = {"q1": "a1", "q2": "a2"}
        recorder = LlmGateway("record", cassette_path=cassette,
                              transport=lambda r: responses[r.messages[-1].text])
        assert recorder.complete(req("q1")) == "a1"
        assert recorder.complete(req("q2")) == "a2"

        replayer = LlmGateway("replay", cassette_path=cassette)
        assert replayer.complete(req("q2")) == "a2"
        assert replayer.complete(req("q1")) == "a1"

    def test_replay_miss_on_any_text_change(self, tmp_path):
        cassette = tmp_path / "c.jsonl"
        recorder = LlmGateway("record", cassette_path=cassette,
                              transport=lambda r: "resp")
        recorder.complete(req("original"))
        replayer = LlmGateway("replay", cassette_path=cassette)
        with pytest.raises(ReplayMiss):
            replayer.complete(req("original!"))

    def test_rerecording_same_key_same_response_is_idempotent(self, tmp_path):
        cassette = tmp_path / "c.jsonl"
        recorder = LlmGateway("record", cassette_path=cassette,
                              transport=lambda r: "stable")
        recorder.complete(req("q"))
        recorder.complete(req("q"))
        assert len(cassette.read_text().splitlines()) == 1

    def test_rerecording_with_different_response_errors(self, tmp_path):
        cassette = tmp_path / "c.jsonl"
        flips = iter(["first", "second"])
        gw = LlmGateway("record", cassette_path=cassette,
                        transport=lambda r: next(flips))
        gw.complete(req("q"))
        fresh = LlmGateway("record", cassette_path=cassette,
                           transport=lambda r: next(flips))
        with pytest.raises(CassetteConflict):
            fresh.complete(req("q"))

    def test_record_mode_requires_temperature_zero(self, tmp_path):
        gw = LlmGateway("record", cassette_path=tmp_path / "c.jsonl",
                        transport=lambda r: "x")
        warm = ChatRequest(messages=(ChatMessage("user", "q"),), temperature=0.7)
        with pytest.raises(ValueError):
            gw.complete(warm)

    def test_cassette_lines_carry_key_request_response(self, tmp_path):
        cassette = tmp_path / "c.jsonl"
        gw = LlmGateway("record", cassette_path=cassette, transport=lambda r: "a")
        gw.complete(req("q"))
        entry = json.loads(cassette.read_text())
        assert set(entry) == {"key", "request", "response", "recorded_at"}
        assert entry["key"] == request_key(req("q"))
        assert load_cassette(cassette) == {entry["key"]: "a"}

    def test_modes_are_validated(self):
        with pytest.raises(ValueError):
            LlmGateway("fuzzy")
        with pytest.raises(ValueError):
            LlmGateway("replay")  # cassette path required
