from __future__ import annotations

import json

from crossling.llm.gateway import LlmRequest
from crossling.llm.mock import MockBackend
from crossling.llm.prompts import (
    doc_translate_bindings,
    knowledge_probe_bindings,
    qa_generate_bindings,
    qa_translate_bindings,
    qa_verify_bindings,
    recognition_judge_bindings,
)


def call(backend: MockBackend, template_id: str, bindings: dict) -> str:
    request = LlmRequest(
        template_id=template_id,
        bindings=bindings,
        temperature=0.0,
        max_tokens=512,
        model="mock-model",
    )
    return backend.complete("(prompt unused)", request)


def test_probe_admits_known_entities_and_hedges_otherwise():
    backend = MockBackend(known_entities=("Glass Harvest",))
    known = call(backend, "knowledge_probe", knowledge_probe_bindings("Glass Harvest"))
    unknown = call(backend, "knowledge_probe", knowledge_probe_bindings("Quarry Nineteen"))
    assert "Glass Harvest" in known and "recognize" in known
    assert unknown == "I don't have any information about 'Quarry Nineteen'."


def test_judge_rules_hedged_probe_unknown(movie_document):
    backend = MockBackend()
    verdict = json.loads(
        call(
            backend,
            "recognition_judge",
            recognition_judge_bindings(
                "I don't have any information about 'Harbor of Glass'.",
                movie_document.text,
            ),
        )
    )
    assert verdict["verdict"] == "Unknown"
    assert verdict["matched_facts"] == []


def test_judge_matches_document_facts(movie_document):
    backend = MockBackend()
    probe = "Harbor of Glass stars Nadia Osei, Viktor Brandt according to what I recall."
    verdict = json.loads(
        call(
            backend,
            "recognition_judge",
            recognition_judge_bindings(probe, movie_document.text),
        )
    )
    assert verdict["verdict"] == "Known"
    assert "Nadia Osei, Viktor Brandt" in verdict["matched_facts"]

    vague = "It is probably a well-reviewed drama about the sea."
    verdict = json.loads(
        call(
            backend,
            "recognition_judge",
            recognition_judge_bindings(vague, movie_document.text),
        )
    )
    assert verdict["verdict"] == "Unknown"


def test_qa_generate_is_grounded_in_document(movie_document):
    backend = MockBackend()
    payload = json.loads(
        call(backend, "qa_generate", qa_generate_bindings("movie", "en", movie_document.text))
    )
    items = payload["QA"]
    # one question per non-title labeled field
    assert len(items) == 3
    for item in items:
        assert set(item["options"]) == {"A", "B", "C", "D"}
        assert item["correct_option"] in "ABCD"
        correct = item["options"][item["correct_option"]]
        assert correct in movie_document.text
        assert "'Harbor of Glass'" in item["question"]
        # distractors must differ from the correct option
        others = [v for k, v in item["options"].items() if k != item["correct_option"]]
        assert correct not in others


def test_qa_verify_supported_iff_answer_in_document(movie_document):
    backend = MockBackend()
    qa = {
        "question": "q",
        "options": {"A": "Nadia Osei, Viktor Brandt", "B": "x", "C": "y", "D": "z"},
        "correct_option": "A",
    }
    decision = json.loads(
        call(
            backend,
            "qa_verify",
            qa_verify_bindings(movie_document.text, json.dumps(qa, sort_keys=True)),
        )
    )
    assert decision["Decision"] == "SUPPORTED"
    assert decision["SourceSentence"] == "- Movie Cast: Nadia Osei, Viktor Brandt"

    qa["options"]["A"] = "Someone Else Entirely"
    decision = json.loads(
        call(
            backend,
            "qa_verify",
            qa_verify_bindings(movie_document.text, json.dumps(qa, sort_keys=True)),
        )
    )
    assert decision["Decision"] == "UNSUPPORTED"


def test_qa_translate_tags_values_and_keeps_structure():
    backend = MockBackend()
    qa = {
        "question": "In the movie: 'Harbor of Glass', who appears?",
        "options": {"A": "Nadia Osei", "B": "b", "C": "c", "D": "d"},
        "correct_option": "A",
    }
    out = json.loads(
        call(backend, "qa_translate", qa_translate_bindings("ja", json.dumps(qa)))
    )
    assert out["correct_option"] == "A"
    assert out["question"].startswith("⟦ja⟧ ")
    assert out["question"].endswith("who appears?")
    assert out["options"]["A"] == "⟦ja⟧ Nadia Osei"

    # translating into the pivot language is the identity
    same = json.loads(
        call(backend, "qa_translate", qa_translate_bindings("en", json.dumps(qa)))
    )
    assert same == qa


def test_qa_translate_retag_does_not_stack():
    backend = MockBackend()
    qa = {
        "question": "⟦ja⟧ tagged already",
        "options": {"A": "⟦ja⟧ a", "B": "b", "C": "c", "D": "d"},
        "correct_option": "B",
    }
    out = json.loads(
        call(backend, "qa_translate", qa_translate_bindings("fr", json.dumps(qa)))
    )
    assert out["question"] == "⟦fr⟧ tagged already"
    assert out["options"]["A"] == "⟦fr⟧ a"


def test_doc_translate_maps_output_keys_in_order():
    backend = MockBackend()
    fields = {
        "casts": "Nadia Osei, Viktor Brandt",
        "summary": "A keeper counts mirrors.",
        "synopsis": "Ilsa catalogs the wreck.",
    }
    out = json.loads(
        call(backend, "doc_translate", doc_translate_bindings("movie", "zh", fields))
    )
    assert out == {
        "translation": {
            "Cast": "⟦zh⟧ Nadia Osei, Viktor Brandt",
            "Summary": "⟦zh⟧ A keeper counts mirrors.",
            "Synopsis": "⟦zh⟧ Ilsa catalogs the wreck.",
        }
    }


def test_mock_is_deterministic(movie_document):
    a = MockBackend(known_entities=("X",))
    b = MockBackend(known_entities=("X",))
    bindings = qa_generate_bindings("movie", "ja", movie_document.text)
    assert call(a, "qa_generate", bindings) == call(b, "qa_generate", bindings)
