#include "srag/eval.hpp"

#include "srag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace srag {
namespace {

std::vector<double> diffs_of(std::span<const EvalRecord> records) {
    std::vector<double> diffs;
    diffs.reserve(records.size());
    for (const auto& r : records)
        diffs.push_back(r.diff());
    return diffs;
}

std::vector<std::string> lowercase_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        const bool alnum =
            (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        if (alnum) {
            cur.push_back(
                (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        } else if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty())
        tokens.push_back(cur);
    return tokens;
}

} // namespace

const char* const kJudgeSystemPrompt =
    "You grade the quality of an answer to a question, treating the provided context sections "
    "as ground truth. Scoring scale:\n"
    "100 = fully correct, complete, and grounded in the context;\n"
    "50 = partially correct or incomplete;\n"
    "0 = incorrect, unsupported, or unrelated.\n"
    "Interpolate for intermediate quality. Respond with a single integer between 0 and 100 "
    "and nothing else.";

std::vector<std::pair<std::string, double>> TailRiskReport::rows() const {
    return {
        {"5th Percentile Difference", p5_diff},
        {"10th Percentile Difference", p10_diff},
        {"90th Percentile Difference", p90_diff},
        {"Median Difference", median_diff},
        {"Max Loss", max_loss},
        {"P(SRAG Better)", p_better},
        {"P(SRAG Worse)", p_worse},
        {"Average Harm When Worse", avg_harm_when_worse},
        {"Average Gain When Better", avg_gain_when_better},
    };
}

TailRiskReport tail_risk_report(std::span<const EvalRecord> records) {
    if (records.empty())
        throw InvalidArgument("tail_risk_report: no records");

    const std::vector<double> diffs = diffs_of(records);
    TailRiskReport report;
    report.p5_diff = percentile(diffs, 5.0);
    report.p10_diff = percentile(diffs, 10.0);
    report.p90_diff = percentile(diffs, 90.0);
    report.median_diff = percentile(diffs, 50.0);

    const double min_diff = *std::min_element(diffs.begin(), diffs.end());
    report.max_loss = min_diff < 0.0 ? min_diff : 0.0;

    double harm_sum = 0.0;
    double gain_sum = 0.0;
    std::size_t worse = 0;
    std::size_t better = 0;
    for (double d : diffs) {
        if (d < 0.0) {
            ++worse;
            harm_sum += d;
        } else if (d > 0.0) {
            ++better;
            gain_sum += d;
        }
    }
    const auto n = static_cast<double>(diffs.size());
    report.p_better = static_cast<double>(better) / n;
    report.p_worse = static_cast<double>(worse) / n;
    report.avg_harm_when_worse = worse ? harm_sum / static_cast<double>(worse) : 0.0;
    report.avg_gain_when_better = better ? gain_sum / static_cast<double>(better) : 0.0;
    return report;
}

std::vector<BreakdownRow> class_breakdown(std::span<const EvalRecord> records) {
    if (records.empty())
        throw InvalidArgument("class_breakdown: no records");

    const auto make_row = [](std::string label, std::span<const EvalRecord> subset) {
        BreakdownRow row;
        row.label = std::move(label);
        row.n = subset.size();
        std::vector<double> prag;
        std::vector<double> srag;
        prag.reserve(subset.size());
        srag.reserve(subset.size());
        for (const auto& r : subset) {
            prag.push_back(r.prag_score.value);
            srag.push_back(r.srag_score.value);
        }
        row.mean_prag = mean(prag);
        row.mean_srag = mean(srag);
        if (subset.size() >= 2) {
            row.welch_p = welch_t_test(prag, srag).p_two_sided;
        } else {
            row.sufficient_n = false;
            row.welch_p = std::numeric_limits<double>::quiet_NaN();
        }
        return row;
    };

    std::vector<BreakdownRow> rows;
    rows.push_back(make_row("All Queries", records));
    for (QueryClass cls : kAllQueryClasses) {
        std::vector<EvalRecord> subset;
        for (const auto& r : records)
            if (r.query_class == cls)
                subset.push_back(r);
        if (!subset.empty())
            rows.push_back(make_row(std::string(display_name(cls)), subset));
    }
    return rows;
}

std::array<std::size_t, kAllQueryClasses.size()>
class_distribution(std::span<const EvalRecord> records) {
    std::array<std::size_t, kAllQueryClasses.size()> counts{};
    for (const auto& r : records)
        ++counts[static_cast<std::size_t>(r.query_class)];
    return counts;
}

JudgeScore judge_answer(const std::string& question, const std::string& answer,
                        const std::vector<std::string>& context, ChatClient& judge_client) {
    if (question.empty() || answer.empty())
        throw InvalidArgument("judge_answer: question and answer must be non-empty");
    for (const auto& c : context)
        if (c.empty())
            throw InvalidArgument("judge_answer: context sections must be non-empty");

    std::string user;
    user.append("[QUESTION]\n").append(question).append("\n\n");
    for (std::size_t i = 0; i < context.size(); ++i) {
        user.append("[CONTEXT ").append(std::to_string(i + 1)).append("]\n");
        user.append(context[i]).append("\n\n");
    }
    user.append("[ANSWER]\n").append(answer).append("\n\n");
    user.append("Score (single integer 0-100):");

    constexpr int kMaxRetries = 2;
    std::string last_error;
    bool last_was_range = false;
    for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
        std::string reply = judge_client.complete(kJudgeSystemPrompt, user);
        // Strict parse: an optionally whitespace-padded bare integer.
        std::string_view s = reply;
        while (!s.empty() && (s.front() == ' ' || s.front() == '\n' || s.front() == '\r' ||
                              s.front() == '\t'))
            s.remove_prefix(1);
        while (!s.empty() &&
               (s.back() == ' ' || s.back() == '\n' || s.back() == '\r' || s.back() == '\t'))
            s.remove_suffix(1);
        const bool numeric = !s.empty() && s.size() <= 3 &&
                             std::all_of(s.begin(), s.end(),
                                         [](unsigned char c) { return c >= '0' && c <= '9'; });
        if (!numeric) {
            last_error = "non-numeric judge reply '" + reply.substr(0, 40) + "'";
            last_was_range = false;
            continue;
        }
        const int value = std::stoi(std::string(s));
        if (value > 100) {
            last_error = "judge score " + std::to_string(value) + " outside [0, 100]";
            last_was_range = true;
            continue;
        }
        return JudgeScore{static_cast<double>(value)};
    }
    if (last_was_range)
        throw RangeError("judge_answer: " + last_error + " after " +
                         std::to_string(kMaxRetries) + " retries");
    throw ContentError("judge_answer: " + last_error + " after " + std::to_string(kMaxRetries) +
                       " retries");
}

RecallJudge::RecallJudge(std::unordered_map<std::string, std::string> gold_text_by_query)
    : gold_text_by_query_(std::move(gold_text_by_query)) {}

JudgeScore RecallJudge::score(const std::string& query_id, const std::string&,
                              const std::string&, const std::vector<std::string>& context) {
    const auto it = gold_text_by_query_.find(query_id);
    if (it == gold_text_by_query_.end())
        throw InvalidArgument("RecallJudge: no gold text for query '" + query_id + "'");
    for (const auto& section : context)
        if (section.find(it->second) != std::string::npos)
            return JudgeScore{100.0};
    return JudgeScore{0.0};
}

JudgeScore OverlapJudge::score(const std::string&, const std::string& question,
                               const std::string& answer, const std::vector<std::string>&) {
    const std::vector<std::string> q_tokens = lowercase_tokens(question);
    if (q_tokens.empty())
        return JudgeScore{0.0};
    const std::vector<std::string> a_tokens = lowercase_tokens(answer);
    std::size_t hits = 0;
    for (const auto& t : q_tokens)
        if (std::find(a_tokens.begin(), a_tokens.end(), t) != a_tokens.end())
            ++hits;
    const double frac = static_cast<double>(hits) / static_cast<double>(q_tokens.size());
    return JudgeScore{std::round(frac * 100.0)};
}

} // namespace srag
