"""Filter generation from LLM output and the three-tier fallback cascade."""

from __future__ import annotations

import pytest

import foodrag.transport as transport
from foodrag.filters import Cmp, FilterError, FilterErrorKind, MatchAll, Op
from foodrag.filtergen import (
    CascadeRetriever,
    PromptSpec,
    RemoteLlmBackend,
    ScriptedLlmBackend,
    generate_loose,
    generate_strict,
    sanitize_response,
)
from foodrag.store import Tier
from foodrag.transport import BackendUnavailable

PROTEIN_QUESTION = "Which foods have more than 12 g of protein?"


class TestSanitizeResponse:
    def test_plain_document_unchanged(self):
        document = '{"protein, total": {"$gt": 12}}'
        assert sanitize_response(document) == document

    def test_strips_code_fences(self):
        wrapped = '```json\n{"salt": {"$lt": 1}}\n```'
        assert sanitize_response(wrapped) == '{"salt": {"$lt": 1}}'

    def test_strips_surrounding_prose(self):
        text = 'Sure! Here is the filter you asked for: {"salt": 1} Hope that helps.'
        assert sanitize_response(text) == '{"salt": 1}'

    def test_keeps_first_balanced_block_only(self):
        text = '{"a": 1} and then {"b": 2}'
        assert sanitize_response(text) == '{"a": 1}'

    def test_braces_inside_strings_do_not_confuse(self):
        document = '{"food group": "weird } name {", "x": 1}'
        assert sanitize_response(f"prefix {document} suffix") == document

    def test_content_inside_braces_untouched(self):
        document = '{"$and": [{"salt": {"$lt": 3}}, {"food group": "Cheeses"}]}'
        assert sanitize_response(f"```\n{document}\n```") == document

    def test_no_braces_returns_stripped_text(self):
        assert sanitize_response("  not json at all \n") == "not json at all"

    def test_unbalanced_returns_stripped_text(self):
        assert sanitize_response(' {"a": [1, 2 ') == '{"a": [1, 2'


class TestPromptSpec:
    def test_default_templates_render(self, fixture_schema):
        prompts = PromptSpec.default()
        strict = prompts.render_strict(PROTEIN_QUESTION, fixture_schema)
        loose = prompts.render_loose(PROTEIN_QUESTION, fixture_schema)
        assert PROTEIN_QUESTION in strict and PROTEIN_QUESTION in loose
        for name in fixture_schema.field_names():
            assert name in strict
        assert "food group" in loose

    def test_braces_in_template_text_survive(self, fixture_schema):
        prompts = PromptSpec.default()
        rendered = prompts.render_strict("q", fixture_schema)
        assert '{"<field>": {"<op>": <value>}}' in rendered

    def test_missing_slots_rejected(self):
        with pytest.raises(ValueError, match="question"):
            PromptSpec(strict_template="{field_names}", loose_template="{question}")
        with pytest.raises(ValueError, match="field_names"):
            PromptSpec(strict_template="{question}", loose_template="{question}")


class TestScriptedBackend:
    def test_attempt_indexing(self):
        backend = ScriptedLlmBackend({"q": ["first", "second"]})
        assert backend.complete("prompt", "q", 0) == "first"
        assert backend.complete("prompt", "q", 1) == "second"

    def test_short_script_repeats_last(self):
        backend = ScriptedLlmBackend({"q": ["only"]})
        assert backend.complete("prompt", "q", 1) == "only"

    def test_unknown_question_is_unavailable(self):
        backend = ScriptedLlmBackend({})
        with pytest.raises(BackendUnavailable):
            backend.complete("prompt", "q", 0)

    def test_repeatable(self):
        backend = ScriptedLlmBackend({"q": ["a", "b"]})
        assert [backend.complete("p", "q", 0) for _ in range(3)] == ["a", "a", "a"]


class TestRemoteBackend:
    def test_payload_and_content(self, monkeypatch):
        seen = {}

        def fake_post(url, json=None, headers=None, timeout=None):
            seen.update(url=url, payload=json, headers=headers)

            class Response:
                status_code = 200
                text = ""

                @staticmethod
                def json():
                    return {"choices": [{"message": {"content": '{"salt": 1}'}}]}

            return Response()

        monkeypatch.setattr(transport.requests, "post", fake_post)
        monkeypatch.setenv("LLM_API_TOKEN", "tok")
        backend = RemoteLlmBackend("http://llm.test/chat", "model-x", temperature=0.0)
        content = backend.complete("the prompt", "irrelevant", 0)
        assert content == '{"salt": 1}'
        assert seen["payload"] == {
            "model": "model-x",
            "messages": [{"role": "user", "content": "the prompt"}],
            "temperature": 0.0,
        }
        assert seen["headers"]["Authorization"] == "Bearer tok"

    def test_bad_shape_is_unavailable(self, monkeypatch):
        class Response:
            status_code = 200
            text = ""

            @staticmethod
            def json():
                return {"unexpected": True}

        monkeypatch.setattr(transport.requests, "post", lambda *a, **k: Response())
        backend = RemoteLlmBackend("http://llm.test", "m")
        with pytest.raises(BackendUnavailable):
            backend.complete("p", "q", 0)


class TestGenerateStrict:
    def test_paper_pair(self, fixture_schema):
        backend = ScriptedLlmBackend(
            {PROTEIN_QUESTION: ['{"protein, total": {"$gt": 12}}']}
        )
        expr, raw = generate_strict(PROTEIN_QUESTION, fixture_schema, backend, PromptSpec.default())
        assert expr == Cmp("protein, total", Op.GT, 12)
        assert raw == '{"protein, total": {"$gt": 12}}'

    def test_malformed_response(self, fixture_schema):
        backend = ScriptedLlmBackend({"q": ["not json"]})
        with pytest.raises(FilterError) as excinfo:
            generate_strict("q", fixture_schema, backend, PromptSpec.default())
        assert excinfo.value.kind is FilterErrorKind.SYNTAX
        assert excinfo.value.raw_response == "not json"

    def test_wrong_field_name(self, fixture_schema):
        backend = ScriptedLlmBackend({"q": ['{"protien": {"$gt": 12}}']})
        with pytest.raises(FilterError) as excinfo:
            generate_strict("q", fixture_schema, backend, PromptSpec.default())
        assert excinfo.value.kind is FilterErrorKind.UNKNOWN_FIELD

    def test_fenced_response_is_sanitized(self, fixture_schema):
        backend = ScriptedLlmBackend({"q": ['```json\n{"salt": {"$lt": 1}}\n```']})
        expr, raw = generate_strict("q", fixture_schema, backend, PromptSpec.default())
        assert expr == Cmp("salt", Op.LT, 1)
        assert "```" in raw  # raw response preserved verbatim


class TestGenerateLoose:
    def test_food_group_passes(self, fixture_schema):
        backend = ScriptedLlmBackend({"q": ['{"food group": "Cheeses"}']})
        expr, _ = generate_loose("q", fixture_schema, backend, PromptSpec.default())
        assert expr == Cmp("food group", Op.EQ, "Cheeses")

    def test_non_food_group_field_rejected(self, fixture_schema):
        backend = ScriptedLlmBackend({"q": ['{"salt": {"$lt": 1}}']})
        with pytest.raises(FilterError) as excinfo:
            generate_loose("q", fixture_schema, backend, PromptSpec.default())
        assert excinfo.value.kind is FilterErrorKind.STRUCTURE

    def test_malformed_rejected(self, fixture_schema):
        backend = ScriptedLlmBackend({"q": ["garbage"]})
        with pytest.raises(FilterError) as excinfo:
            generate_loose("q", fixture_schema, backend, PromptSpec.default())
        assert excinfo.value.kind is FilterErrorKind.SYNTAX

    def test_empty_object_rejected(self, fixture_schema):
        # {} constrains nothing; the cascade's semantic tier covers that case
        backend = ScriptedLlmBackend({"q": ["{}"]})
        with pytest.raises(FilterError) as excinfo:
            generate_loose("q", fixture_schema, backend, PromptSpec.default())
        assert excinfo.value.kind is FilterErrorKind.STRUCTURE

    def test_uses_second_scripted_response(self, fixture_schema):
        backend = ScriptedLlmBackend({"q": ["bad strict", '{"food group": "Fish"}']})
        expr, _ = generate_loose("q", fixture_schema, backend, PromptSpec.default())
        assert expr == Cmp("food group", Op.EQ, "Fish")


class FailingEmbedder:
    kind = "failing"
    dimension = 64

    def embed(self, texts):
        raise BackendUnavailable("embedding service down")


@pytest.fixture
def retriever_factory(fixture_schema, fixture_store, embedder):
    def make(responses, threshold=1.0, embed_backend=None):
        return CascadeRetriever(
            schema=fixture_schema,
            store=fixture_store,
            llm=ScriptedLlmBackend(responses),
            embedder=embed_backend or embedder,
            threshold=threshold,
        )

    return make


class TestCascade:
    def test_all_valid_is_strict_tier(self, retriever_factory, fixture_items):
        retriever = retriever_factory(
            {PROTEIN_QUESTION: ['{"protein, total": {"$gt": 12}}']}
        )
        outcome = retriever.retrieve(PROTEIN_QUESTION)
        assert outcome.result.tier is Tier.STRICT
        expected = {
            i.id for i in fixture_items if i.components.get("protein, total", 0) > 12
        }
        assert outcome.result.id_set() == expected
        assert [a.tier for a in outcome.attempts] == [Tier.STRICT]
        assert outcome.attempts[0].error is None
        assert outcome.attempts[0].raw_response == '{"protein, total": {"$gt": 12}}'

    def test_strict_fail_loose_ok_is_loose_tier(self, retriever_factory, fixture_items):
        retriever = retriever_factory(
            {"cheeses low in salt": ["not a filter", '{"food group": "Cheeses"}']},
            threshold=2.0,
        )
        outcome = retriever.retrieve("cheeses low in salt")
        assert outcome.result.tier is Tier.LOOSE
        cheese_ids = {i.id for i in fixture_items if i.food_group == "Cheeses"}
        assert outcome.result.id_set() <= cheese_ids
        assert outcome.result.id_set()  # threshold 2.0 admits the whole group
        assert [a.tier for a in outcome.attempts] == [Tier.STRICT, Tier.LOOSE]
        assert isinstance(outcome.attempts[0].error, FilterError)
        assert outcome.attempts[0].raw_response == "not a filter"
        assert outcome.attempts[1].error is None

    def test_both_fail_is_semantic_tier(self, retriever_factory):
        retriever = retriever_factory(
            {"odd question": ["bad", "also bad"]}, threshold=0.9
        )
        outcome = retriever.retrieve("odd question")
        assert outcome.result.tier is Tier.SEMANTIC
        assert outcome.result.threshold_used == 0.9
        assert all(d <= 0.9 for _, d in outcome.result.items)
        assert [a.tier for a in outcome.attempts] == [
            Tier.STRICT, Tier.LOOSE, Tier.SEMANTIC,
        ]

    def test_unknown_question_falls_to_semantic(self, retriever_factory):
        retriever = retriever_factory({}, threshold=1.0)
        outcome = retriever.retrieve("completely unscripted")
        assert outcome.result.tier is Tier.SEMANTIC
        assert isinstance(outcome.attempts[0].error, BackendUnavailable)
        assert isinstance(outcome.attempts[1].error, BackendUnavailable)

    def test_attempts_are_prefix_of_tier_order(self, retriever_factory):
        cases = {
            "q-strict": ['{"salt": {"$lt": 1}}'],
            "q-loose": ["bad", '{"food group": "Fish"}'],
            "q-semantic": ["bad", "bad"],
        }
        retriever = retriever_factory(cases, threshold=1.5)
        order = [Tier.STRICT, Tier.LOOSE, Tier.SEMANTIC]
        for question in cases:
            outcome = retriever.retrieve(question)
            tiers = [a.tier for a in outcome.attempts]
            assert tiers == order[: len(tiers)]
            assert outcome.attempts[-1].tier is outcome.result.tier
            assert all(a.duration_s >= 0 for a in outcome.attempts)

    def test_strict_success_never_embeds(self, retriever_factory):
        retriever = retriever_factory(
            {"q": ['{"salt": {"$lt": 1}}']}, embed_backend=FailingEmbedder()
        )
        outcome = retriever.retrieve("q")  # embedding backend would explode
        assert outcome.result.tier is Tier.STRICT

    def test_embed_failure_propagates(self, retriever_factory):
        retriever = retriever_factory({"q": ["bad", "bad"]}, embed_backend=FailingEmbedder())
        with pytest.raises(BackendUnavailable):
            retriever.retrieve("q")

    def test_embed_failure_at_loose_tier_propagates(self, retriever_factory):
        retriever = retriever_factory(
            {"q": ["bad", '{"food group": "Fish"}']}, embed_backend=FailingEmbedder()
        )
        with pytest.raises(BackendUnavailable):
            retriever.retrieve("q")

    def test_empty_strict_result_is_success_not_fallback(self, retriever_factory):
        retriever = retriever_factory(
            {"impossible": ['{"protein, total": {"$gt": 10000}}', '{"food group": "Fish"}']}
        )
        outcome = retriever.retrieve("impossible")
        assert outcome.result.tier is Tier.STRICT
        assert outcome.result.items == ()

    def test_loose_match_all_response_reaches_semantic(self, retriever_factory):
        retriever = retriever_factory({"q": ["nope", "{}"]}, threshold=1.2)
        outcome = retriever.retrieve("q")
        assert outcome.result.tier is Tier.SEMANTIC
        assert isinstance(outcome.result.filter_used, MatchAll)


def test_module_level_cascade_helper(fixture_schema, fixture_store, embedder):
    from foodrag.filtergen import retrieve_with_cascade

    outcome = retrieve_with_cascade(
        PROTEIN_QUESTION,
        store=fixture_store,
        schema=fixture_schema,
        llm=ScriptedLlmBackend({PROTEIN_QUESTION: ['{"protein, total": {"$gt": 12}}']}),
        embedder=embedder,
        threshold=1.0,
    )
    assert outcome.result.tier is Tier.STRICT
    assert outcome.result.id_set()
