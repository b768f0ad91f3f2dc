import random

from memestream.extraction import MemeKey
from memestream.graph import DiffusionNetwork, MENTION_EDGE, RETWEET

from conftest import BASE_TS, make_tweet

KEY = MemeKey("hashtag", "syria")


def test_retweet_edge_and_counters():
    net = DiffusionNetwork(KEY)
    t = make_tweet(tweet_id=1, user_id=10, screen_name="alice",
                   text="RT @bob #syria", retweet_of=(20, "bob"))
    net.apply_tweet(t, [(20, "bob")])
    assert set(net.nodes) == {10, 20}
    assert net.edges[(20, 10, RETWEET)].weight == 1
    assert net.nodes[20].retweeted_count == 1
    assert net.nodes[10].tweet_count == 1
    assert net.nodes[20].tweet_count == 0
    # the RT @bob mention resolves to the origin: no extra mention edge
    assert len(net.edges) == 1


def test_mention_edges():
    net = DiffusionNetwork(KEY)
    t = make_tweet(tweet_id=1, user_id=10, screen_name="alice", text="@bob @carol #p2")
    net.apply_tweet(t, [(20, "bob"), (30, "carol")])
    assert net.edges[(10, 20, MENTION_EDGE)].weight == 1
    assert net.edges[(10, 30, MENTION_EDGE)].weight == 1
    assert set(net.nodes) == {10, 20, 30}


def test_repeat_event_increments_weight_and_last_seen():
    net = DiffusionNetwork(KEY)
    t1 = make_tweet(tweet_id=1, user_id=10, text="RT @bob #syria", retweet_of=(20, "bob"))
    t2 = make_tweet(tweet_id=2, ts=BASE_TS + 60, user_id=10,
                    text="RT @bob #syria", retweet_of=(20, "bob"))
    net.apply_tweet(t1, [(20, "bob")])
    net.apply_tweet(t2, [(20, "bob")])
    edge = net.edges[(20, 10, RETWEET)]
    assert edge.weight == 2
    assert edge.first_seen == BASE_TS
    assert edge.last_seen == BASE_TS + 60
    assert net.nodes[20].retweeted_count == 2


def test_self_retweet_dropped_and_counted():
    # self-retweet drops the edge; the @alice mention equals the retweet
    # origin so the origin-exclusion rule removes it before drop counting
    net = DiffusionNetwork(KEY)
    t = make_tweet(tweet_id=1, user_id=10, screen_name="alice",
                   text="RT @alice hi @alice #syria", retweet_of=(10, "alice"))
    dropped = net.apply_tweet(t, [(10, "alice")])
    assert dropped == 1
    assert net.edges == {}
    assert set(net.nodes) == {10}
    assert net.self_edges_dropped == 1


def test_self_mention_dropped_and_counted():
    net = DiffusionNetwork(KEY)
    t = make_tweet(tweet_id=1, user_id=10, screen_name="alice", text="hi @alice #syria")
    dropped = net.apply_tweet(t, [(10, "alice")])
    assert dropped == 1
    assert net.edges == {}
    assert net.self_edges_dropped == 1


def test_isolated_author_node():
    net = DiffusionNetwork(KEY)
    net.apply_tweet(make_tweet(tweet_id=1, user_id=10, text="#syria alone"))
    assert set(net.nodes) == {10}
    assert net.edges == {}
    assert net.dsu.max_size == 1


def test_snapshot_immutability():
    net = DiffusionNetwork(KEY)
    net.apply_tweet(make_tweet(tweet_id=1, user_id=10, text="#syria"))
    snap = net.snapshot()
    for i in range(100):
        net.apply_tweet(
            make_tweet(tweet_id=2 + i, ts=BASE_TS + i, user_id=100 + i,
                       screen_name=f"u{i}", text="RT @x #syria", retweet_of=(10, "alice"))
        )
    assert snap.tweet_count == 1
    assert len(snap.nodes) == 1
    assert snap.edges == {}
    assert net.tweet_count == 101


def test_snapshot_of_empty_network():
    snap = DiffusionNetwork(KEY).snapshot()
    assert len(snap.nodes) == 0
    assert len(snap.edges) == 0
    assert snap.tweet_count == 0


def _random_stream(rng, n_tweets=60, n_users=12):
    tweets = []
    for i in range(n_tweets):
        uid = rng.randrange(n_users) + 1
        retweet_of = None
        mentions = []
        if rng.random() < 0.4:
            origin = rng.randrange(n_users) + 1
            retweet_of = (origin, f"u{origin}")
        if rng.random() < 0.5:
            m = rng.randrange(n_users) + 1
            mentions.append((m, f"u{m}"))
        t = make_tweet(
            tweet_id=i + 1,
            ts=BASE_TS + i,
            user_id=uid,
            screen_name=f"u{uid}",
            text="#syria event",
            retweet_of=retweet_of,
        )
        tweets.append((t, mentions))
    return tweets


def test_invariants_on_random_streams():
    rng = random.Random(1234)
    for _ in range(30):
        net = DiffusionNetwork(KEY)
        retweet_events = 0
        mention_events = 0
        dropped = 0
        prev_counts = (0, 0, 0)
        for t, mentions in _random_stream(rng):
            d = net.apply_tweet(t, mentions)
            dropped += d
            if t.retweet_of_user_id is not None:
                retweet_events += 1
            mention_events += sum(
                1 for uid, _ in mentions if uid != t.retweet_of_user_id
            )
            counts = (len(net.nodes), len(net.edges), net.tweet_count)
            assert all(a >= b for a, b in zip(counts, prev_counts))  # monotone
            prev_counts = counts

        # endpoint closure
        for src, dst, kind in net.edges:
            assert src in net.nodes and dst in net.nodes

        # weight conservation: every event lands in an edge or the dropped counter
        rt_weight = sum(e.weight for (s, d, k), e in net.edges.items() if k == RETWEET)
        mention_weight = sum(e.weight for (s, d, k), e in net.edges.items() if k == MENTION_EDGE)
        assert rt_weight + mention_weight + dropped == retweet_events + mention_events

        # retweeted_count equals outgoing retweet weight per node
        for uid, node in net.nodes.items():
            out = sum(e.weight for (s, d, k), e in net.edges.items() if k == RETWEET and s == uid)
            assert node.retweeted_count == out

        # edge timestamps ordered and within the network lifespan
        for e in net.edges.values():
            assert net.first_seen <= e.first_seen <= e.last_seen <= net.last_seen


def test_obj_round_trip():
    rng = random.Random(99)
    net = DiffusionNetwork(KEY, recent_cap=10)
    for t, mentions in _random_stream(rng):
        net.apply_tweet(t, mentions)
    clone = DiffusionNetwork.from_obj(net.to_obj())
    assert clone.to_obj() == net.to_obj()
    assert clone.dsu.max_size == net.dsu.max_size
    assert len(clone.recent) == len(net.recent)
