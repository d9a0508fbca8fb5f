#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "reagan/actions.hpp"
#include "reagan/errors.hpp"
#include "reagan/retrieval.hpp"
#include "reagan/snapshot.hpp"

using namespace reagan;

namespace {

// layer-0 view of the five-node fixture: every node carries its original text
LayerSnapshot original_snapshot(const TextAttributedGraph& g) {
    LayerSnapshot snap;
    snap.layer = 0;
    for (const NodeRecord& n : g.nodes()) snap.aggregates.push_back(n.text);
    return snap;
}

} // namespace

TEST_CASE("textagg mode names") {
    CHECK(textagg_mode_name(TextAggMode::Concat) == "concat");
    CHECK(textagg_mode_name(TextAggMode::Summarize) == "summarize");
}

TEST_CASE("summarize_prompt wraps the material") {
    std::string p = summarize_prompt("alpha || beta");
    CHECK(p.find("Summarize the following material") == 0);
    CHECK(p.find("alpha || beta") != std::string::npos);
}

TEST_CASE("snapshot lookup is by node id") {
    LayerSnapshot snap;
    snap.aggregates = {"zero", "one"};
    CHECK(snap.aggregate_of(0) == "zero");
    CHECK(snap.aggregate_of(1) == "one");
    CHECK_THROWS_AS(snap.aggregate_of(9), std::out_of_range);
}

TEST_CASE("text_agg concat joins with the separator") {
    CHECK(text_agg("self", {}, TextAggMode::Concat, 100) == "self");
    CHECK(text_agg("self", {"a", "b"}, TextAggMode::Concat, 100) == "self || a || b");
}

TEST_CASE("text_agg concat truncates to the budget at a utf-8 boundary") {
    std::string joined = text_agg("self", {"aaaa", "bbbb"}, TextAggMode::Concat, 10);
    CHECK(joined == "self || aa");
    CHECK(joined.size() == 10);

    // budget 9 lands inside the two-byte é and backs off to the boundary
    std::string accented = text_agg("s", {"café"}, TextAggMode::Concat, 9);
    CHECK(accented == "s || caf");
    CHECK(text_agg("s", {"café"}, TextAggMode::Concat, 7) == "s || ca");

    SUBCASE("the node's own text is never truncated") {
        std::string self_heavy = text_agg("twelve chars", {"neighbor"}, TextAggMode::Concat, 5);
        CHECK(self_heavy == "twelve chars");
    }
    SUBCASE("budget equal to the join keeps everything") {
        std::string exact = text_agg("ab", {"cd"}, TextAggMode::Concat, 8);
        CHECK(exact == "ab || cd");
    }
}

TEST_CASE("text_agg summarize delegates to the summarizer") {
    std::string seen_material;
    Summarizer summarize = [&](const std::string& material) {
        seen_material = material;
        return std::string("  a tidy summary  ");
    };
    std::string out = text_agg("self", {"n1", "n2"}, TextAggMode::Summarize, 100, summarize);
    CHECK(out == "a tidy summary"); // trimmed
    CHECK(seen_material == "self || n1 || n2");

    SUBCASE("long summaries are capped at the budget") {
        Summarizer verbose = [](const std::string&) {
            return std::string("this summary runs well past the byte budget");
        };
        CHECK(text_agg("self", {"n"}, TextAggMode::Summarize, 11, verbose) == "this summar");
    }
    SUBCASE("the self text length still floors the cap") {
        Summarizer verbose = [](const std::string&) { return std::string("0123456789"); };
        CHECK(text_agg("eight ch", {"n"}, TextAggMode::Summarize, 4, verbose) == "01234567");
    }
}

TEST_CASE("text_agg summarize failure modes") {
    CHECK_THROWS_AS(text_agg("self", {"n"}, TextAggMode::Summarize, 100, {}),
                    SummarizeBackendFailure);
    Summarizer throwing = [](const std::string&) -> std::string {
        throw std::runtime_error("backend down");
    };
    CHECK_THROWS_AS(text_agg("self", {"n"}, TextAggMode::Summarize, 100, throwing),
                    SummarizeBackendFailure);
    Summarizer empty = [](const std::string&) { return std::string("   "); };
    CHECK_THROWS_AS(text_agg("self", {"n"}, TextAggMode::Summarize, 100, empty),
                    SummarizeBackendFailure);
}

TEST_CASE("local_aggregate joins neighbor snapshots and collects train examples") {
    auto g = test_support::five_node_graph();
    LayerSnapshot snap = original_snapshot(g);
    AggregateOptions options;
    options.hops = 1;

    AggregationResult r = local_aggregate(3, snap, g, options);
    CHECK(r.source == MemorySource::Local);
    CHECK(r.new_aggregate == "delta mixed || alpha red apple || bravo red berry || echo mixed");
    CHECK(r.contributing_nodes == std::vector<NodeId>{0, 1, 4});
    // node 4 is test split, so only nodes 0 and 1 become examples
    REQUIRE(r.examples.size() == 2);
    CHECK(r.examples[0].origin_node == 0);
    CHECK(r.examples[0].text == "alpha red apple");
    CHECK(r.examples[0].label == 1);
    CHECK(r.examples[0].rank == 0);
    CHECK(r.examples[1].origin_node == 1);
    CHECK(r.examples[1].rank == 1);

    SUBCASE("two hops widen the neighborhood") {
        options.hops = 2;
        AggregationResult wide = local_aggregate(2, snap, g, options);
        CHECK(wide.contributing_nodes == std::vector<NodeId>{3, 4});
        CHECK(wide.new_aggregate == "charlie blue cloud || delta mixed || echo mixed");
        CHECK(wide.examples.empty()); // both reachable nodes are test split
    }
    SUBCASE("isolated neighborhoods still aggregate the self text") {
        auto lonely = TextAttributedGraph::from_records({{"a", "only node", "x"}}, {});
        LayerSnapshot s;
        s.aggregates = {"only node"};
        AggregationResult alone = local_aggregate(0, s, lonely, options);
        CHECK(alone.new_aggregate == "only node");
        CHECK(alone.contributing_nodes.empty());
        CHECK(alone.examples.empty());
    }
}

TEST_CASE("local_aggregate reads the snapshot, not live node texts") {
    auto g = test_support::five_node_graph();
    LayerSnapshot snap = original_snapshot(g);
    // neighbor 0 advanced at the previous layer; node 3 must see that text
    snap.aggregates[0] = "alpha layer-one aggregate";
    AggregateOptions options;

    AggregationResult r = local_aggregate(3, snap, g, options);
    CHECK(r.new_aggregate ==
          "delta mixed || alpha layer-one aggregate || bravo red berry || echo mixed");
    CHECK(r.examples[0].text == "alpha layer-one aggregate");

    SUBCASE("examples_use_raw_text swaps in the original node text") {
        options.examples_use_raw_text = true;
        AggregationResult raw = local_aggregate(3, snap, g, options);
        CHECK(raw.new_aggregate ==
              "delta mixed || alpha layer-one aggregate || bravo red berry || echo mixed");
        CHECK(raw.examples[0].text == "alpha red apple");
    }
}

TEST_CASE("global_aggregate retrieves by the node's carried aggregate") {
    auto g = test_support::five_node_graph();
    test_support::FixedEmbedder embedder(test_support::five_node_vectors());
    SemanticIndex index = build_index(g, embedder);

    // layer-1 state: node 3 carries its local aggregate, everyone else originals
    LayerSnapshot snap = original_snapshot(g);
    snap.layer = 1;
    snap.aggregates[3] = "delta mixed || alpha red apple || bravo red berry || echo mixed";

    AggregateOptions options;
    options.k = 2;
    AggregationResult r = global_aggregate(3, snap, index, embedder, options);
    CHECK(r.source == MemorySource::Global);
    // query (1,1,0): node 1 scores 0.99, nodes 0 and 2 tie at 0.71, id picks 0;
    // self is excluded despite scoring 0.99
    CHECK(r.contributing_nodes == std::vector<NodeId>{1, 0});
    CHECK(r.new_aggregate ==
          "delta mixed || alpha red apple || bravo red berry || echo mixed || bravo red berry "
          "|| alpha red apple");
    REQUIRE(r.examples.size() == 2);
    CHECK(r.examples[0].origin_node == 1);
    CHECK(r.examples[0].rank == 0);
    CHECK(r.examples[1].origin_node == 0);
    CHECK(r.examples[1].rank == 1);

    SUBCASE("k beyond the pool returns every other node") {
        options.k = 10;
        AggregationResult all = global_aggregate(3, snap, index, embedder, options);
        CHECK(all.contributing_nodes.size() == 4);
        // the test-split hit has no index label, so only train nodes 0, 1, 2 qualify
        CHECK(all.examples.size() == 3);
    }
    SUBCASE("hit texts come from the snapshot") {
        snap.aggregates[1] = "bravo advanced text";
        AggregationResult moved = global_aggregate(3, snap, index, embedder, options);
        CHECK(moved.new_aggregate ==
              "delta mixed || alpha red apple || bravo red berry || echo mixed || bravo "
              "advanced text || alpha red apple");
        CHECK(moved.examples[0].text == "bravo advanced text");
    }
    SUBCASE("examples_use_raw_text uses the indexed text") {
        snap.aggregates[1] = "bravo advanced text";
        options.examples_use_raw_text = true;
        AggregationResult raw = global_aggregate(3, snap, index, embedder, options);
        CHECK(raw.examples[0].text == "bravo red berry");
    }
}

TEST_CASE("no_op changes nothing by construction") {
    no_op(3);
}
