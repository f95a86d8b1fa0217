"""Prompt registry and deterministic rendering.

Every model call in the pipeline goes through one of these six templates.
Bodies are product constants; the movie renderings are the canonical
wording, and other domains substitute their own nouns and field lists
through the same placeholders.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from ..domains import PROFILES, DomainProfile
from ..errors import MissingPlaceholder

_PLACEHOLDER = re.compile(r"\{([a-z][a-z0-9_]*)\}")


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    body: str
    required: frozenset[str]


QA_GENERATE_BODY = """You are generating high-quality multiple-choice QA pairs in {lang}, strictly grounded in the given {domain_noun} information.

You will be provided with:
{field_list}

Task:
- Generate natural, audience-friendly questions that viewers might realistically ask.
- All questions must be written fully in {lang}, including the leading phrase ({question_lead}).
- Each QA pair must be based ONLY on facts explicitly present in the input. Do not add, assume, or hallucinate.
- Use diverse aspects ({aspect_hint}).

Each QA pair must include:
- Question in {lang}, beginning with {question_lead} (do not translate title)
- Options:
    - Provide four options labeled A, B, C, D.
    - Exactly one option is correct.
    - Place the correct option randomly among A–D (do not always use the same position).
    - Distractors must be plausible but wrong (no random, absurd, or unrelated answers).
- Correct Option: Output the letter (A, B, C, or D) of the correct answer.

--------------------------
Inputs:
{meta_data}

--------------------------
Output Format (JSON):
{
    "QA": [
        {
            "question": "<string in {lang}>",
            "options": {
                "A": "<option A in {lang}>",
                "B": "<option B in {lang}>",
                "C": "<option C in {lang}>",
                "D": "<option D in {lang}>"
            },
            "correct_option": "<A | B | C | D>"
        },
        ...
    ]
}

--------------------------
Guidelines:
- Write everything (questions and options) only in {lang}.
- Keep all proper names (people, places, entities) unchanged.
- Ensure every correct answer can be directly verified in the input metadata.
- Distractors must be reasonable, related, and plausible."""


QA_VERIFY_BODY = """You are verifying if QA pairs are grounded in the provided metadata.

Check:
- Is the correct option explicitly supported by the metadata?
- If yes, return SUPPORTED and the supporting sentence(s).
- If not, return UNSUPPORTED.

Output Format:
{
  "Decision": "<SUPPORTED or UNSUPPORTED>",
  "SourceSentence": "<sentence(s) from metadata or empty>"
}

Metadata:
{meta_data}

QA:
{qa_json}"""


QA_TRANSLATE_BODY = """Translate the QA JSON into target language {lang}.

Rules:
- Translate only values of "question" and "options".
- Do NOT translate keys ("QA", "question", "options", "A"..."D", "correct_option").
- Keep "correct_option" unchanged.
- Preserve JSON structure.

QA JSON:
{qa_json}"""


DOC_TRANSLATE_BODY = """Translate the following {domain_noun} document into {lang}.
- Do NOT translate the field names (e.g., {field_names_example}).
- Translate only the values after the colon.
- If the text is already in {lang}, return it unchanged.
- Return only the JSON object, no extra text.

Document:
{field_lines}

Output Format:
{output_format}"""


KNOWLEDGE_PROBE_BODY = """Provide a brief factual summary of '{entity_name}'."""


RECOGNITION_JUDGE_BODY = """You are judging whether a model response shows prior knowledge of an entity.

You are given the model's response to a factual-summary request and the entity's source document.
Decide whether the response states at least one concrete fact that is consistent with the document.
Concrete facts are specific names, dates, scores, cast members, venues, or outcomes.
Generic statements, genre-level descriptions, plot clichés, and hedged guesses do not count.

Output Format:
{
  "verdict": "<Known or Unknown>",
  "matched_facts": ["<concrete fact from the response confirmed by the document>", ...],
  "rationale": "<one sentence>"
}

Model response:
{probe_text}

Source document:
{document}"""


REGISTRY: dict[str, PromptTemplate] = {
    "qa_generate": PromptTemplate(
        "qa_generate",
        QA_GENERATE_BODY,
        frozenset({"lang", "domain_noun", "field_list", "question_lead", "aspect_hint", "meta_data"}),
    ),
    "qa_verify": PromptTemplate(
        "qa_verify", QA_VERIFY_BODY, frozenset({"meta_data", "qa_json"})
    ),
    "qa_translate": PromptTemplate(
        "qa_translate", QA_TRANSLATE_BODY, frozenset({"lang", "qa_json"})
    ),
    "doc_translate": PromptTemplate(
        "doc_translate",
        DOC_TRANSLATE_BODY,
        frozenset({"lang", "domain_noun", "field_names_example", "field_lines", "output_format"}),
    ),
    "knowledge_probe": PromptTemplate(
        "knowledge_probe", KNOWLEDGE_PROBE_BODY, frozenset({"entity_name"})
    ),
    "recognition_judge": PromptTemplate(
        "recognition_judge", RECOGNITION_JUDGE_BODY, frozenset({"probe_text", "document"})
    ),
}


def render_prompt(template_id: str, bindings: Mapping[str, str]) -> str:
    """Substitute placeholders in one pass; byte-deterministic.

    Literal braces in the JSON output-format sections never match the
    ``{name}`` placeholder pattern, and substituted values are never
    re-scanned, so bound text cannot inject placeholders.
    """
    template = REGISTRY[template_id]
    for name in sorted(template.required):
        if name not in bindings:
            raise MissingPlaceholder(name)

    def substitute(match: re.Match) -> str:
        name = match.group(1)
        if name not in bindings:
            raise MissingPlaceholder(name)
        return str(bindings[name])

    return _PLACEHOLDER.sub(substitute, template.body)


def _profile(domain: str) -> DomainProfile:
    return PROFILES[domain]


def qa_generate_bindings(domain: str, lang: str, document_text: str) -> dict[str, str]:
    profile = _profile(domain)
    return {
        "lang": lang,
        "domain_noun": profile.noun,
        "field_list": "\n".join(f"- {name}" for name in profile.provided_fields),
        "question_lead": profile.question_lead,
        "aspect_hint": profile.aspect_hint,
        "meta_data": document_text,
    }


def qa_verify_bindings(document_text: str, qa_json: str) -> dict[str, str]:
    return {"meta_data": document_text, "qa_json": qa_json}


def qa_translate_bindings(lang: str, qa_json: str) -> dict[str, str]:
    return {"lang": lang, "qa_json": qa_json}


def doc_translate_bindings(domain: str, lang: str, fields: Mapping[str, object]) -> dict[str, str]:
    profile = _profile(domain)
    field_lines = []
    for field_key, doc_label, _out_key in profile.translated_fields:
        value = " ".join(str(fields.get(field_key, "")).split())
        field_lines.append(f"{doc_label}: {value}")
    inner = ",\n".join(
        f'    "{out_key}": "<translated {out_key.lower()}>"'
        for _f, _l, out_key in profile.translated_fields
    )
    output_format = '{\n  "translation": {\n' + inner + "\n  }\n}"
    labels = ", ".join(
        '"{}"'.format(doc_label[2:] if doc_label.startswith("- ") else doc_label)
        for _f, doc_label, _o in profile.translated_fields
    )
    return {
        "lang": lang,
        "domain_noun": profile.noun,
        "field_names_example": labels,
        "field_lines": "\n".join(field_lines),
        "output_format": output_format,
    }


def knowledge_probe_bindings(entity_name: str) -> dict[str, str]:
    return {"entity_name": entity_name}


def recognition_judge_bindings(probe_text: str, document_text: str) -> dict[str, str]:
    return {"probe_text": probe_text, "document": document_text}
