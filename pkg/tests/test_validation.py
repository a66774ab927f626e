import random

import pytest

import gen
from termnode.model import (
    LangSection,
    MediaKind,
    MediaRef,
    Severity,
    TermEntry,
    TermRecord,
)
from termnode.validation import has_errors, validate_entry


def entry_with(**kwargs):
    defaults = dict(lang_sections=[LangSection(lang="en", terms=[TermRecord(term="server")])])
    defaults.update(kwargs)
    return TermEntry(**defaults)


def codes(entry):
    return [issue.code for issue in validate_entry(entry)]


def test_clean_entry_has_no_issues():
    assert validate_entry(entry_with()) == []


def test_empty_term():
    entry = entry_with(lang_sections=[LangSection(lang="en", terms=[TermRecord(term="")])])
    assert codes(entry) == ["EMPTY_TERM"]
    assert has_errors(validate_entry(entry))


def test_whitespace_term_counts_as_empty():
    entry = entry_with(lang_sections=[LangSection(lang="en", terms=[TermRecord(term="  \t ")])])
    assert "EMPTY_TERM" in codes(entry)


def test_invalid_lang_code():
    entry = entry_with(lang_sections=[LangSection(lang="english", terms=[TermRecord(term="x")])])
    assert codes(entry) == ["INVALID_LANG"]


@pytest.mark.parametrize("code", ["en", "lv", "de-at", "pt-br", "sgn", "en-001"])
def test_acceptable_lang_codes(code):
    assert codes(entry_with(lang_sections=[LangSection(lang=code, terms=[TermRecord(term="x")])])) == []


@pytest.mark.parametrize("code", ["e", "ENGLISH", "en_us", "en-", "1234", ""])
def test_rejected_lang_codes(code):
    entry = entry_with(lang_sections=[LangSection(lang=code, terms=[TermRecord(term="x")])])
    assert "INVALID_LANG" in codes(entry)


def test_lang_comparison_is_case_insensitive():
    entry = entry_with(
        lang_sections=[
            LangSection(lang="en", terms=[TermRecord(term="a")]),
            LangSection(lang="EN", terms=[TermRecord(term="b")]),
        ]
    )
    assert codes(entry) == ["DUPLICATE_LANG_SECTION"]


def test_no_lang_section():
    assert codes(TermEntry()) == ["NO_LANG_SECTION"]


def test_markup_in_term_is_warning():
    entry = entry_with(lang_sections=[LangSection(lang="en", terms=[TermRecord(term="<b>server</b>")])])
    issues = validate_entry(entry)
    assert [i.code for i in issues] == ["MARKUP_IN_TERM"]
    assert issues[0].severity is Severity.WARNING
    assert not has_errors(issues)


def test_escaped_markup_detected():
    entry = entry_with(lang_sections=[LangSection(lang="en", terms=[TermRecord(term="&lt;b&gt;bold")])])
    assert "MARKUP_IN_TERM" in codes(entry)


def test_multiline_term():
    entry = entry_with(lang_sections=[LangSection(lang="en", terms=[TermRecord(term="two\nlines")])])
    assert codes(entry) == ["MULTILINE_TERM"]


def test_bad_media_url_is_warning():
    entry = entry_with(media=[MediaRef(url="ftp://files/x.png", kind=MediaKind.IMAGE)])
    issues = validate_entry(entry)
    assert [i.code for i in issues] == ["BAD_MEDIA_URL"]
    assert issues[0].severity is Severity.WARNING


def test_good_media_url_passes():
    entry = entry_with(media=[MediaRef(url="https://example.org/x.png")])
    assert codes(entry) == []


def test_blank_definition_warning():
    assert codes(entry_with(definition="   ")) == ["EMPTY_DEFINITION_PRESENT"]
    entry = entry_with(lang_sections=[LangSection(lang="en", definition="\t", terms=[TermRecord(term="x")])])
    assert codes(entry) == ["EMPTY_DEFINITION_PRESENT"]


def test_section_without_terms():
    entry = entry_with(lang_sections=[LangSection(lang="en", terms=[])])
    assert codes(entry) == ["EMPTY_LANG_SECTION"]


def test_unlisted_enum_value_flagged():
    rec = TermRecord(term="x")
    rec.part_of_speech = "substantive"  # bypasses the enum on purpose
    entry = entry_with(lang_sections=[LangSection(lang="en", terms=[rec])])
    assert "INVALID_VALUE" in codes(entry)


def test_control_characters_rejected():
    entry = entry_with(definition="null\x00byte")
    assert "CONTROL_CHARS" in codes(entry)


def test_duplicate_subject_fields_flagged():
    assert "INVALID_VALUE" in codes(entry_with(subject_fields=["it", "it"]))


def test_non_uuid_id_flagged():
    assert "INVALID_VALUE" in codes(entry_with(id="not-a-uuid"))


def test_issue_paths_are_locators():
    entry = entry_with(lang_sections=[LangSection(lang="en", terms=[TermRecord(term="a"), TermRecord(term="")])])
    [issue] = validate_entry(entry)
    assert issue.path == f"entry/{entry.id}/lang/en/term/1"


def test_generated_entries_are_always_clean():
    rng = random.Random(5)
    for _ in range(100):
        issues = validate_entry(gen.entry(rng))
        assert not has_errors(issues), [i.to_dict() for i in issues]
