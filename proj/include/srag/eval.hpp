#pragma once

#include "srag/chat.hpp"
#include "srag/metadata.hpp"
#include "srag/stats.hpp"

#include <array>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace srag {

/// Judge score on the [0, 100] scale.
struct JudgeScore {
    double value = 0.0;

    bool operator==(const JudgeScore&) const = default;
};

/// Per-query judge scores for both systems. The score difference is always
/// recomputed, never stored.
struct EvalRecord {
    std::string query_id;
    QueryClass query_class = QueryClass::informational;
    JudgeScore prag_score;
    JudgeScore srag_score;

    double diff() const { return srag_score.value - prag_score.value; }

    bool operator==(const EvalRecord&) const = default;
};

/// Distributional comparison of the per-query score differences.
struct TailRiskReport {
    double p5_diff = 0.0;
    double p10_diff = 0.0;
    double p90_diff = 0.0;
    double median_diff = 0.0;
    double max_loss = 0.0;            // min(diff) when negative, else 0
    double p_better = 0.0;            // fraction diff > 0 (ties excluded)
    double p_worse = 0.0;             // fraction diff < 0 (ties excluded)
    double avg_harm_when_worse = 0.0; // mean of negative diffs, 0 if none
    double avg_gain_when_better = 0.0;

    /// The nine report rows, labeled and ordered as published.
    std::vector<std::pair<std::string, double>> rows() const;
};

TailRiskReport tail_risk_report(std::span<const EvalRecord> records);

/// One row of the per-class score table.
struct BreakdownRow {
    std::string label; // "All Queries" or a query class display name
    std::size_t n = 0;
    double mean_prag = 0.0;
    double mean_srag = 0.0;
    double welch_p = 1.0;
    bool sufficient_n = true; // false when n < 2 (p not computable)
};

/// "All Queries" first, then one row per query class present, in class order.
/// Classes with a single record are reported with sufficient_n = false rather
/// than dropped.
std::vector<BreakdownRow> class_breakdown(std::span<const EvalRecord> records);

/// Counts per query class, in class order; sums to records.size().
std::array<std::size_t, kAllQueryClasses.size()>
class_distribution(std::span<const EvalRecord> records);

/// Scores an answer with one chat call against a fixed rubric demanding a
/// bare integer in [0, 100]. Non-numeric or out-of-range replies retry up to
/// twice, then raise ContentError / RangeError.
JudgeScore judge_answer(const std::string& question, const std::string& answer,
                        const std::vector<std::string>& context, ChatClient& judge_client);

/// Grading rubric, versioned with the repository.
extern const char* const kJudgeSystemPrompt;

/// Scores answers for evaluation records. Implementations must be safe for
/// concurrent calls.
class Judge {
public:
    virtual ~Judge() = default;

    virtual JudgeScore score(const std::string& query_id, const std::string& question,
                             const std::string& answer,
                             const std::vector<std::string>& context) = 0;

    virtual std::string name() const = 0;
};

class LlmJudge final : public Judge {
public:
    explicit LlmJudge(ChatClient& client) : client_(client) {}

    JudgeScore score(const std::string&, const std::string& question, const std::string& answer,
                     const std::vector<std::string>& context) override {
        return judge_answer(question, answer, context, client_);
    }
    std::string name() const override { return "llm:" + client_.name(); }

private:
    ChatClient& client_;
};

/// Offline judge for corpora with gold chunks: 100 when the query's gold text
/// appears in the retrieved context, else 0.
class RecallJudge final : public Judge {
public:
    explicit RecallJudge(std::unordered_map<std::string, std::string> gold_text_by_query);

    JudgeScore score(const std::string& query_id, const std::string& question,
                     const std::string& answer,
                     const std::vector<std::string>& context) override;
    std::string name() const override { return "local:recall"; }

private:
    std::unordered_map<std::string, std::string> gold_text_by_query_;
};

/// Offline judge without gold labels: percentage of question tokens that
/// appear in the answer.
class OverlapJudge final : public Judge {
public:
    JudgeScore score(const std::string&, const std::string& question, const std::string& answer,
                     const std::vector<std::string>& context) override;
    std::string name() const override { return "local:overlap"; }
};

} // namespace srag
