import json
import random

import networkx as nx
import pytest

from memestream.analytics import UserLabels, largest_connected_component, mean_degree
from memestream.extraction import MemeKey
from memestream.graph import DiffusionNetwork
from memestream.storage import (
    EventLog,
    LogCorruption,
    UnknownFormat,
    export_edgelist,
    export_graphml,
    export_json,
    export_network,
    import_edgelist,
    import_json,
    load_latest_snapshot,
    save_snapshot,
    validate_graphml,
)

from conftest import BASE_TS, make_tweet

KEY = MemeKey("hashtag", "p2")


def simple_network():
    net = DiffusionNetwork(KEY)
    t = make_tweet(tweet_id=1, user_id=11, screen_name="alice",
                   text="RT @bob #p2", retweet_of=(22, "bob"))
    net.apply_tweet(t, [(22, "bob")])
    return net


def random_network(rng, n_users=20, n_tweets=40):
    net = DiffusionNetwork(MemeKey("hashtag", f"r{rng.randrange(10**6)}"))
    for i in range(n_tweets):
        uid = rng.randrange(n_users) + 1
        mentions = []
        retweet_of = None
        if rng.random() < 0.35:
            o = rng.randrange(n_users) + 1
            retweet_of = (o, f"u{o}")
        if rng.random() < 0.5:
            m = rng.randrange(n_users) + 1
            mentions.append((m, f"u{m}"))
        net.apply_tweet(
            make_tweet(tweet_id=i + 1, ts=BASE_TS + i, user_id=uid, screen_name=f"u{uid}",
                       text="#r x", retweet_of=retweet_of),
            mentions,
        )
    return net


class TestEventLog:
    def test_append_replay_order(self, tmp_path):
        log = EventLog(tmp_path / "log")
        for i in range(100):
            log.append(make_tweet(tweet_id=i + 1, ts=BASE_TS + i, text=f"n{i} text"), ["A"])
        log.close()
        replayed = list(EventLog(tmp_path / "log").replay_log())
        assert len(replayed) == 100
        assert [t.id for t, _ in replayed] == list(range(1, 101))
        assert all(themes == ["A"] for _, themes in replayed)

    def test_rotation_and_manifest(self, tmp_path):
        log = EventLog(tmp_path / "log", segment_size=10)
        for i in range(25):
            log.append(make_tweet(tweet_id=i + 1, text="abc def"), ["A"])
        log.close()
        manifest = json.loads((tmp_path / "log" / "manifest.json").read_text())
        assert len(manifest["segments"]) == 2
        assert [s["count"] for s in manifest["segments"]] == [10, 10]
        assert manifest["segments"][0]["first_id"] == 1
        assert manifest["segments"][0]["last_id"] == 10
        reopened = EventLog(tmp_path / "log", segment_size=10)
        assert reopened.count == 25
        assert len(list(reopened.replay_log())) == 25
        assert [t.id for t, _ in reopened.replay_log(start=23)] == [24, 25]

    def test_truncated_tail_repaired(self, tmp_path):
        log = EventLog(tmp_path / "log")
        for i in range(5):
            log.append(make_tweet(tweet_id=i + 1, text="abc def"), ["A"])
        log.close()
        seg = tmp_path / "log" / "segment-000000.ndjson"
        data = seg.read_bytes()
        seg.write_bytes(data[:-7])  # torn mid-record
        reopened = EventLog(tmp_path / "log")
        assert reopened.count == 4
        assert [t.id for t, _ in reopened.replay_log()] == [1, 2, 3, 4]
        # the torn bytes are gone; appends continue cleanly
        reopened.append(make_tweet(tweet_id=99, text="abc def"), ["A"])
        reopened.close()
        assert [t.id for t, _ in EventLog(tmp_path / "log").replay_log()] == [1, 2, 3, 4, 99]

    def test_closed_segment_corruption_detected(self, tmp_path):
        log = EventLog(tmp_path / "log", segment_size=5)
        for i in range(7):
            log.append(make_tweet(tweet_id=i + 1, text="abc def"), ["A"])
        log.close()
        seg = tmp_path / "log" / "segment-000000.ndjson"
        seg.write_bytes(seg.read_bytes().replace(b"abc", b"xyz", 1))
        with pytest.raises(LogCorruption):
            EventLog(tmp_path / "log", segment_size=5)


class TestSnapshots:
    def test_round_trip(self, tmp_path):
        save_snapshot(tmp_path / "snaps", {"state": {"x": 1}}, accepted=10)
        loaded = load_latest_snapshot(tmp_path / "snaps", max_accepted=100)
        assert loaded == (10, {"state": {"x": 1}})

    def test_respects_max_accepted(self, tmp_path):
        save_snapshot(tmp_path / "snaps", {"n": 1}, accepted=10, keep=5)
        save_snapshot(tmp_path / "snaps", {"n": 2}, accepted=20, keep=5)
        assert load_latest_snapshot(tmp_path / "snaps", max_accepted=15) == (10, {"n": 1})

    def test_corrupt_snapshot_skipped(self, tmp_path):
        save_snapshot(tmp_path / "snaps", {"n": 1}, accepted=10, keep=5)
        path = save_snapshot(tmp_path / "snaps", {"n": 2}, accepted=20, keep=5)
        path.write_text(path.read_text()[:-20] + '"broken')
        assert load_latest_snapshot(tmp_path / "snaps", max_accepted=100) == (10, {"n": 1})

    def test_pruning(self, tmp_path):
        for n in (1, 2, 3, 4):
            save_snapshot(tmp_path / "snaps", {"n": n}, accepted=n, keep=2)
        assert len(list((tmp_path / "snaps").glob("state-*.json"))) == 2


class TestEdgelist:
    def test_simple_body(self):
        data = export_edgelist(simple_network()).decode()
        lines = data.splitlines()
        assert lines[0] == "source\ttarget\ttype\tweight"
        assert lines[1] == "22\t11\tretweet\t1"
        assert len(lines) == 2

    def test_empty_network_header_only(self):
        data = export_edgelist(DiffusionNetwork(KEY)).decode()
        assert data == "source\ttarget\ttype\tweight\n"

    def test_isolated_nodes_round_trip(self):
        net = DiffusionNetwork(KEY)
        net.apply_tweet(make_tweet(tweet_id=1, user_id=5, screen_name="solo", text="#p2 alone"))
        data = export_edgelist(net)
        assert b"5\t\t\t0" in data
        clone = import_edgelist(data)
        assert set(clone.nodes) == {5}
        assert clone.edges == {}

    def test_deterministic_bytes(self):
        rng1, rng2 = random.Random(3), random.Random(3)
        assert export_edgelist(random_network(rng1)) == export_edgelist(random_network(rng2))


class TestJsonExport:
    def test_round_trip_preserves_stats(self):
        rng = random.Random(8)
        for _ in range(20):
            net = random_network(rng)
            clone = import_json(export_json(net))
            assert len(clone.nodes) == len(net.nodes)
            assert {k: e.weight for k, e in clone.edges.items()} == {
                k: e.weight for k, e in net.edges.items()
            }
            assert mean_degree(clone) == mean_degree(net)
            assert largest_connected_component(clone) == largest_connected_component(net)

    def test_partisanship_attached(self):
        labels = {22: UserLabels(partisanship=-0.8)}
        obj = json.loads(export_json(simple_network(), labels).decode())
        by_id = {n["id"]: n for n in obj["nodes"]}
        assert by_id[22]["partisanship"] == -0.8
        assert "partisanship" not in by_id[11]


class TestGraphML:
    def test_validates_and_parses_with_reference_reader(self):
        net = simple_network()
        data = export_graphml(net, {22: UserLabels(partisanship=0.5)})
        validate_graphml(data)
        g = nx.parse_graphml(data.decode())
        assert g.number_of_nodes() == 2
        assert g.number_of_edges() == 1
        assert g.nodes["11"]["screen_name"] == "alice"
        assert g.nodes["22"]["partisanship"] == 0.5
        edge_attrs = list(g.edges(data=True))[0][2]
        assert edge_attrs["type"] == "retweet"
        assert edge_attrs["weight"] == 1

    def test_empty_network_valid(self):
        data = export_graphml(DiffusionNetwork(KEY))
        validate_graphml(data)
        assert nx.parse_graphml(data.decode()).number_of_nodes() == 0

    def test_parallel_edges_preserved(self):
        net = DiffusionNetwork(KEY)
        t = make_tweet(tweet_id=1, user_id=11, screen_name="alice",
                       text="RT @bob hi @carol #p2", retweet_of=(22, "bob"))
        net.apply_tweet(t, [(22, "bob"), (33, "carol")])
        t2 = make_tweet(tweet_id=2, ts=BASE_TS + 5, user_id=22, screen_name="bob", text="@alice #p2")
        net.apply_tweet(t2, [(11, "alice")])
        data = export_graphml(net)
        validate_graphml(data)
        g = nx.parse_graphml(data.decode())
        assert g.number_of_edges() == len(net.edges) == 3

    def test_validator_rejects_dangling_edge(self):
        bad = (
            '<?xml version="1.0"?>'
            '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">'
            '<graph id="g" edgedefault="directed">'
            '<node id="1"/><edge source="1" target="2"/>'
            "</graph></graphml>"
        ).encode()
        with pytest.raises(ValueError):
            validate_graphml(bad)

    def test_validator_rejects_undeclared_key(self):
        bad = (
            '<?xml version="1.0"?>'
            '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">'
            '<graph id="g" edgedefault="directed">'
            '<node id="1"><data key="d9">x</data></node>'
            "</graph></graphml>"
        ).encode()
        with pytest.raises(ValueError):
            validate_graphml(bad)


def test_unknown_format_rejected():
    with pytest.raises(UnknownFormat):
        export_network(simple_network(), "gexf")


def test_exports_deterministic_for_identical_snapshots():
    rng1, rng2 = random.Random(77), random.Random(77)
    a, b = random_network(rng1), random_network(rng2)
    for fmt in ("edgelist", "graphml", "json"):
        assert export_network(a, fmt) == export_network(b, fmt)
