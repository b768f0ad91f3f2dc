import json

import pytest

from memestream.extraction import Entities
from memestream.ingest import Tweet, parse_timestamp
from memestream.themes import Theme

BASE_TS = parse_timestamp("2010-09-01T12:00:00Z")


def make_tweet(
    tweet_id=1,
    ts=BASE_TS,
    user_id=42,
    screen_name="alice",
    text="hello there friend",
    retweet_of=None,
    entities=None,
):
    rt_id, rt_name = (None, None) if retweet_of is None else retweet_of
    if isinstance(entities, dict):
        entities = Entities(
            hashtags=tuple(entities.get("hashtags", ())),
            mentions=tuple(entities.get("mentions", ())),
            urls=tuple(entities.get("urls", ())),
        )
    return Tweet(
        id=tweet_id,
        created_at=ts,
        user_id=user_id,
        screen_name=screen_name,
        text=text,
        retweet_of_user_id=rt_id,
        retweet_of_screen_name=rt_name,
        entities=entities,
    )


def record_line(**fields):
    obj = {
        "id": 1,
        "created_at": "2010-09-01T12:00:00Z",
        "user_id": 42,
        "screen_name": "alice",
        "text": "hello world",
    }
    obj.update(fields)
    for key in [k for k, v in obj.items() if v is None]:
        del obj[key]
    return json.dumps(obj, ensure_ascii=False)


@pytest.fixture
def themes3(tmp_path):
    """Three-theme config used across pipeline tests; keywords overlap the
    generator's tag vocabulary so routing sees both salted and organic hits."""
    path = tmp_path / "themes.ndjson"
    path.write_text(
        "\n".join(
            [
                json.dumps(
                    {
                        "name": "Social Movements",
                        "keywords": ["#occupy", "protest", "@oneofficialacct"],
                        "description": "hand-picked demo theme",
                    }
                ),
                json.dumps({"name": "Politics", "keywords": ["#tag000", "#tag001", "election"]}),
                json.dumps({"name": "Tech", "keywords": ["#tag002", "gadget"]}),
            ]
        )
        + "\n",
        encoding="utf-8",
    )
    return path


def load_themes3(themes3_path):
    from memestream.themes import load_themes

    return load_themes(themes3_path)
