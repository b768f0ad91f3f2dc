import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memestream.themes import (
    ConfigError,
    DUPLICATE_NAME,
    EMPTY_KEYWORDS,
    MALFORMED,
    Theme,
    load_themes,
    matches_theme,
    route,
)

from conftest import make_tweet


def write_themes(tmp_path, *objs):
    path = tmp_path / "themes.ndjson"
    path.write_text("\n".join(json.dumps(o) for o in objs) + "\n", encoding="utf-8")
    return path


class TestLoadThemes:
    def test_single_theme(self, tmp_path):
        path = write_themes(
            tmp_path, {"name": "Social Movements", "keywords": ["#occupy", "protest"]}
        )
        themes = load_themes(path)
        assert len(themes) == 1
        assert themes[0].name == "Social Movements"
        assert themes[0].keywords == ("#occupy", "protest")

    def test_duplicate_names_rejected(self, tmp_path):
        path = write_themes(
            tmp_path,
            {"name": "Politics", "keywords": ["a"]},
            {"name": "Politics", "keywords": ["b"]},
        )
        with pytest.raises(ConfigError) as err:
            load_themes(path)
        assert err.value.reason == DUPLICATE_NAME

    def test_empty_file_is_valid(self, tmp_path):
        path = tmp_path / "themes.ndjson"
        path.write_text("", encoding="utf-8")
        assert load_themes(path) == []

    def test_empty_keywords_rejected(self, tmp_path):
        path = write_themes(tmp_path, {"name": "X", "keywords": []})
        with pytest.raises(ConfigError) as err:
            load_themes(path)
        assert err.value.reason == EMPTY_KEYWORDS

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "themes.ndjson"
        path.write_text("not json\n", encoding="utf-8")
        with pytest.raises(ConfigError) as err:
            load_themes(path)
        assert err.value.reason == MALFORMED

    def test_keywords_normalized_lowercase(self, tmp_path):
        path = write_themes(tmp_path, {"name": "X", "keywords": ["#Occupy", "@SomeUser", "Protest"]})
        theme = load_themes(path)[0]
        assert theme.keywords == ("#occupy", "@someuser", "protest")


class TestMatching:
    def test_hashtag_keyword(self):
        theme = Theme.build("X", ["#syria"])
        assert matches_theme(make_tweet(text="#syria under curfew"), theme)

    def test_plain_keyword_whole_token_only(self):
        theme = Theme.build("X", ["syria"])
        assert not matches_theme(make_tweet(text="syrianized word"), theme)
        assert matches_theme(make_tweet(text="will syria recover"), theme)

    def test_author_handle_matches_user_keyword(self):
        theme = Theme.build("X", ["@michelleobama"])
        t = make_tweet(screen_name="MichelleObama", text="no keywords here")
        assert matches_theme(t, theme)

    def test_mention_matches_user_keyword(self):
        theme = Theme.build("X", ["@michelleobama"])
        assert matches_theme(make_tweet(text="ask @MichelleObama today"), theme)

    def test_urls_excluded_from_plain_matching(self):
        theme = Theme.build("X", ["syria"])
        assert not matches_theme(make_tweet(text="see http://syria.example/now"), theme)

    def test_case_insensitive_hashtag(self):
        theme = Theme.build("X", ["#Syria"])
        assert matches_theme(make_tweet(text="#SYRIA now"), theme)


class TestRoute:
    def test_config_order_and_subset(self):
        themes = [
            Theme.build("A", ["#one"]),
            Theme.build("B", ["#two"]),
            Theme.build("C", ["#one", "#three"]),
        ]
        names = route(make_tweet(text="#one here"), themes)
        assert names == ["A", "C"]

    def test_no_themes(self):
        assert route(make_tweet(), []) == []

    def test_restriction_equals_matches_theme(self):
        themes = [Theme.build("A", ["alpha"]), Theme.build("B", ["beta"])]
        t = make_tweet(text="alpha but not the other")
        names = route(t, themes)
        for theme in themes:
            assert (theme.name in names) == matches_theme(t, theme)


words = st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=8)


@given(
    st.lists(words, min_size=1, max_size=6),
    words,
    st.lists(words, min_size=1, max_size=10),
)
@settings(max_examples=200, deadline=None)
def test_keyword_monotonicity(keywords, extra, text_words):
    """Adding a keyword never unroutes a previously routed tweet."""
    t = make_tweet(text=" ".join(text_words))
    base = Theme.build("X", list(keywords))
    grown = Theme.build("X", list(keywords) + [extra])
    if matches_theme(t, base):
        assert matches_theme(t, grown)
