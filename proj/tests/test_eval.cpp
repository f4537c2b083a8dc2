#include "srag/eval.hpp"

#include "srag/errors.hpp"
#include "srag/util.hpp"

#include <doctest.h>

#include <string>
#include <vector>

using namespace srag;

namespace {

// Chat stub that replays a fixed list of replies.
class ScriptedChat final : public ChatClient {
public:
    explicit ScriptedChat(std::vector<std::string> replies) : replies_(std::move(replies)) {}

    std::string complete(const std::string&, const std::string&) override {
        if (calls_ >= replies_.size())
            return replies_.back();
        return replies_[calls_++];
    }
    std::string name() const override { return "scripted"; }

    std::size_t calls() const { return calls_; }

private:
    std::vector<std::string> replies_;
    std::size_t calls_ = 0;
};

EvalRecord record(const std::string& id, QueryClass cls, double prag, double srag) {
    EvalRecord r;
    r.query_id = id;
    r.query_class = cls;
    r.prag_score = JudgeScore{prag};
    r.srag_score = JudgeScore{srag};
    return r;
}

} // namespace

TEST_CASE("judge_answer: a bare integer reply parses directly") {
    ScriptedChat chat({"87"});
    const JudgeScore s = judge_answer("q", "a", {"ctx"}, chat);
    CHECK(s.value == 87.0);
}

TEST_CASE("judge_answer: whitespace-padded integers are accepted") {
    ScriptedChat chat({"  92\n"});
    CHECK(judge_answer("q", "a", {"ctx"}, chat).value == 92.0);
}

TEST_CASE("judge_answer: non-numeric replies retry twice then raise a content error") {
    ScriptedChat chat({"ninety", "ninety", "ninety"});
    CHECK_THROWS_AS(judge_answer("q", "a", {"ctx"}, chat), ContentError);
    CHECK(chat.calls() == 3);
}

TEST_CASE("judge_answer: out-of-range replies raise a range error after retries") {
    ScriptedChat chat({"105", "105", "105"});
    CHECK_THROWS_AS(judge_answer("q", "a", {"ctx"}, chat), RangeError);
}

TEST_CASE("judge_answer: a retry can rescue a flaky judge") {
    ScriptedChat chat({"about 80", "73"});
    CHECK(judge_answer("q", "a", {"ctx"}, chat).value == 73.0);
}

TEST_CASE("judge_answer: empty inputs are rejected") {
    ScriptedChat chat({"50"});
    CHECK_THROWS_AS(judge_answer("", "a", {"c"}, chat), InvalidArgument);
    CHECK_THROWS_AS(judge_answer("q", "", {"c"}, chat), InvalidArgument);
    CHECK_THROWS_AS(judge_answer("q", "a", {""}, chat), InvalidArgument);
}

TEST_CASE("tail_risk_report: all-zero diffs produce an all-zero report") {
    std::vector<EvalRecord> records;
    for (int i = 0; i < 5; ++i)
        records.push_back(record("q" + std::to_string(i), QueryClass::informational, 50, 50));
    const TailRiskReport t = tail_risk_report(records);
    CHECK(t.p5_diff == 0.0);
    CHECK(t.p10_diff == 0.0);
    CHECK(t.p90_diff == 0.0);
    CHECK(t.median_diff == 0.0);
    CHECK(t.max_loss == 0.0);
    CHECK(t.p_better == 0.0);
    CHECK(t.p_worse == 0.0);
    CHECK(t.avg_harm_when_worse == 0.0);
    CHECK(t.avg_gain_when_better == 0.0);
}

TEST_CASE("tail_risk_report: the three-point example, worked by hand") {
    // diffs = [-2, 0, +4]
    const std::vector<EvalRecord> records = {
        record("a", QueryClass::analytical, 52, 50),
        record("b", QueryClass::analytical, 50, 50),
        record("c", QueryClass::analytical, 46, 50),
    };
    const TailRiskReport t = tail_risk_report(records);
    CHECK(t.p_better == doctest::Approx(1.0 / 3.0));
    CHECK(t.p_worse == doctest::Approx(1.0 / 3.0));
    CHECK(t.avg_harm_when_worse == -2.0);
    CHECK(t.avg_gain_when_better == 4.0);
    CHECK(t.median_diff == 0.0);
    CHECK(t.max_loss == -2.0);
    // Interpolated percentiles over sorted [-2, 0, 4].
    CHECK(t.p5_diff == doctest::Approx(-1.8));
    CHECK(t.p10_diff == doctest::Approx(-1.6));
    CHECK(t.p90_diff == doctest::Approx(3.2));
}

TEST_CASE("tail_risk_report: rows carry the nine published labels in order") {
    const std::vector<EvalRecord> records = {record("a", QueryClass::analytical, 40, 60)};
    const auto rows = tail_risk_report(records).rows();
    const std::vector<std::string> expected = {
        "5th Percentile Difference",  "10th Percentile Difference",
        "90th Percentile Difference", "Median Difference",
        "Max Loss",                   "P(SRAG Better)",
        "P(SRAG Worse)",              "Average Harm When Worse",
        "Average Gain When Better"};
    REQUIRE(rows.size() == expected.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        CHECK(rows[i].first == expected[i]);
}

TEST_CASE("tail_risk_report: ordering invariant holds on random inputs") {
    SplitMix64 rng(555);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<EvalRecord> records;
        const std::size_t n = 1 + rng.below(60);
        for (std::size_t i = 0; i < n; ++i)
            records.push_back(record("q" + std::to_string(i), QueryClass::quantitative,
                                     rng.below(101), rng.below(101)));
        const TailRiskReport t = tail_risk_report(records);
        CHECK(t.max_loss <= t.p5_diff);
        CHECK(t.p5_diff <= t.p10_diff);
        CHECK(t.p10_diff <= t.median_diff);
        CHECK(t.median_diff <= t.p90_diff);
        CHECK(t.p_better + t.p_worse <= 1.0 + 1e-12);
        if (t.p_worse > 0)
            CHECK(t.avg_harm_when_worse < 0.0);
        if (t.p_better > 0)
            CHECK(t.avg_gain_when_better > 0.0);
    }
}

TEST_CASE("tail_risk_report: empty input is rejected") {
    CHECK_THROWS_AS(tail_risk_report({}), InvalidArgument);
}

TEST_CASE("class_breakdown: single-class input gives matching class and overall rows") {
    std::vector<EvalRecord> records;
    for (int i = 0; i < 4; ++i)
        records.push_back(record("q" + std::to_string(i), QueryClass::comparative, 60, 80));
    const auto rows = class_breakdown(records);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].label == "All Queries");
    CHECK(rows[1].label == "Comparative");
    CHECK(rows[0].n == 4);
    CHECK(rows[1].n == 4);
    CHECK(rows[0].mean_prag == rows[1].mean_prag);
    CHECK(rows[0].mean_srag == rows[1].mean_srag);
    CHECK(rows[0].welch_p == rows[1].welch_p);
}

TEST_CASE("class_breakdown: disjoint classes partition the overall count") {
    std::vector<EvalRecord> records;
    for (int i = 0; i < 3; ++i)
        records.push_back(record("a" + std::to_string(i), QueryClass::predictive, 70, 90));
    for (int i = 0; i < 5; ++i)
        records.push_back(record("b" + std::to_string(i), QueryClass::analytical, 66, 61));
    const auto rows = class_breakdown(records);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].label == "All Queries");
    CHECK(rows[0].n == 8);
    CHECK(rows[1].label == "Predictive");
    CHECK(rows[1].n == 3);
    CHECK(rows[2].label == "Analytical");
    CHECK(rows[2].n == 5);
    CHECK(rows[1].n + rows[2].n == rows[0].n);
}

TEST_CASE("class_breakdown: known means are reproduced exactly") {
    const std::vector<EvalRecord> records = {
        record("a", QueryClass::quantitative, 10, 30),
        record("b", QueryClass::quantitative, 20, 50),
        record("c", QueryClass::quantitative, 30, 70),
    };
    const auto rows = class_breakdown(records);
    CHECK(rows[0].mean_prag == 20.0);
    CHECK(rows[0].mean_srag == 50.0);
    CHECK(rows[0].sufficient_n);
}

TEST_CASE("class_breakdown: a single-record class is marked insufficient, not dropped") {
    std::vector<EvalRecord> records;
    for (int i = 0; i < 3; ++i)
        records.push_back(record("a" + std::to_string(i), QueryClass::informational, 40, 45));
    records.push_back(record("lone", QueryClass::predictive, 80, 81));
    const auto rows = class_breakdown(records);
    REQUIRE(rows.size() == 3);
    const auto& lone = rows[1]; // Predictive precedes Informational in class order
    CHECK(lone.label == "Predictive");
    CHECK(lone.n == 1);
    CHECK(!lone.sufficient_n);
    CHECK(lone.mean_prag == 80.0);
}

TEST_CASE("class_distribution: counting, zeros included, order-free") {
    CHECK(class_distribution({}) ==
          std::array<std::size_t, kAllQueryClasses.size()>{0, 0, 0, 0, 0, 0});

    std::vector<EvalRecord> records = {
        record("a", QueryClass::comparative, 1, 2),
        record("b", QueryClass::comparative, 1, 2),
        record("c", QueryClass::comparative, 1, 2),
        record("d", QueryClass::predictive, 1, 2),
    };
    const auto counts = class_distribution(records);
    CHECK(counts[static_cast<std::size_t>(QueryClass::comparative)] == 3);
    CHECK(counts[static_cast<std::size_t>(QueryClass::predictive)] == 1);
    std::size_t total = 0;
    for (std::size_t c : counts)
        total += c;
    CHECK(total == records.size());

    std::reverse(records.begin(), records.end());
    CHECK(class_distribution(records) == counts);
}

TEST_CASE("RecallJudge scores by gold text containment in the context") {
    std::unordered_map<std::string, std::string> gold;
    gold.emplace("q1", "the golden sentence");
    RecallJudge judge(std::move(gold));
    CHECK(judge.score("q1", "question", "answer", {"prefix the golden sentence suffix"}).value ==
          100.0);
    CHECK(judge.score("q1", "question", "answer", {"unrelated context"}).value == 0.0);
    CHECK_THROWS_AS(judge.score("unknown", "q", "a", {"c"}), InvalidArgument);
}

TEST_CASE("OverlapJudge measures question-token coverage of the answer") {
    OverlapJudge judge;
    CHECK(judge.score("", "alpha beta", "alpha beta gamma", {}).value == 100.0);
    CHECK(judge.score("", "alpha beta", "alpha", {}).value == 50.0);
    CHECK(judge.score("", "alpha beta", "nothing shared", {}).value == 0.0);
}
