#include "srag/csv.hpp"
#include "srag/index.hpp"
#include "srag/util.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

using namespace srag;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const auto out_file = std::filesystem::temp_directory_path() /
                          ("srag_cli_out_" + std::to_string(counter++) + ".txt");
    const std::string cmd =
        std::string(SRAG_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.output = read_text_file(out_file);
    std::filesystem::remove(out_file);
    return result;
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("srag_cli_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// One shared synthetic workspace, generated once through the CLI itself.
const std::filesystem::path& workspace() {
    static const std::filesystem::path dir = [] {
        const auto d = fresh_dir("workspace");
        const CliResult r = run_cli("synth --out " + d.string() +
                                    " --seed 5 --entities 6 --topics 5 --queries 12");
        REQUIRE(r.exit_code == 0);
        return d;
    }();
    return dir;
}

} // namespace

TEST_CASE("cli: synth generates a runnable workspace") {
    const auto& dir = workspace();
    for (const char* name :
         {"corpus.jsonl", "queries.jsonl", "lexicon.txt", "entities.txt", "config.cfg"})
        CHECK(std::filesystem::exists(dir / name));
}

TEST_CASE("cli ingest: valid config and corpus produce a loadable index") {
    const auto& dir = workspace();
    const auto index_path = dir / "plain.idx";
    const CliResult r = run_cli("ingest --config " + (dir / "config.cfg").string() + " --out " +
                                index_path.string() + " --mode plain");
    CHECK(r.exit_code == 0);
    REQUIRE(std::filesystem::exists(index_path));
    const FlatIndex index = FlatIndex::load(index_path);
    CHECK(index.mode() == IndexMode::plain);
    CHECK(index.size() == 30); // 6 entities x 5 topics, one chunk each
}

TEST_CASE("cli ingest: a missing corpus path fails and names the path") {
    const auto& dir = workspace();
    const CliResult r = run_cli("ingest --config " + (dir / "config.cfg").string() +
                                " --corpus /no/such/corpus.jsonl --out " +
                                (dir / "bad.idx").string());
    CHECK(r.exit_code != 0);
    CHECK(r.output.find("/no/such/corpus.jsonl") != std::string::npos);
}

TEST_CASE("cli ingest: --no-sentiment strips every Sentiment byte from the index") {
    const auto& dir = workspace();
    const auto index_path = dir / "nosent.idx";
    const CliResult r = run_cli("ingest --config " + (dir / "config.cfg").string() + " --out " +
                                index_path.string() + " --no-sentiment");
    CHECK(r.exit_code == 0);
    const std::string bytes = read_text_file(index_path);
    CHECK(bytes.find("Sentiment:") == std::string::npos);
    CHECK(bytes.find("Topics:") != std::string::npos);
}

TEST_CASE("cli ask: answers a question against a saved index") {
    const auto& dir = workspace();
    const auto index_path = dir / "ask.idx";
    REQUIRE(run_cli("ingest --config " + (dir / "config.cfg").string() + " --out " +
                    index_path.string())
                .exit_code == 0);
    const CliResult r = run_cli("ask --config " + (dir / "config.cfg").string() + " --index " +
                                index_path.string() +
                                " --query \"What is the expected margin profile for Meridian "
                                "Foods in FY2027E?\"");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("class: Predictive") != std::string::npos);
    CHECK(r.output.find("[CONTEXT 1]") != std::string::npos);
}

TEST_CASE("cli compare: manifest is finalized on success, left running on failure") {
    const auto& dir = workspace();
    const auto ok_out = fresh_dir("manifest_ok");
    REQUIRE(run_cli("compare --config " + (dir / "config.cfg").string() + " --queries " +
                    (dir / "queries.jsonl").string() + " --out " + ok_out.string())
                .exit_code == 0);
    CHECK(read_text_file(ok_out / "manifest.json").find("\"status\": \"complete\"") !=
          std::string::npos);

    // A query whose gold chunk does not exist aborts scoring after the
    // running marker was written.
    const auto bad_out = fresh_dir("manifest_bad");
    write_text_file(dir / "bad_queries.jsonl",
                    R"({"id": "q1", "text": "anything?", "gold_chunk_id": "missing#0"})"
                    "\n");
    CHECK(run_cli("compare --config " + (dir / "config.cfg").string() + " --queries " +
                  (dir / "bad_queries.jsonl").string() + " --out " + bad_out.string())
              .exit_code != 0);
    CHECK(read_text_file(bad_out / "manifest.json").find("\"status\": \"running\"") !=
          std::string::npos);
}

TEST_CASE("cli compare: emits the documented tables and a row per query") {
    const auto& dir = workspace();
    const auto out = fresh_dir("compare_out");
    const CliResult r = run_cli("compare --config " + (dir / "config.cfg").string() +
                                " --queries " + (dir / "queries.jsonl").string() + " --out " +
                                out.string() + " --local-providers");
    CHECK(r.exit_code == 0);

    const CsvTable class_scores = read_csv(out / "class_scores.csv");
    CHECK(class_scores.header ==
          CsvRow{"query_class", "plain_rag", "structured_rag", "p_value"});
    REQUIRE(!class_scores.rows.empty());
    CHECK(class_scores.rows.front().front() == "All Queries");

    const CsvTable scores = read_csv(out / "scores.csv");
    CHECK(scores.rows.size() == 12);

    const CsvTable tail = read_csv(out / "tail_risk.csv");
    CHECK(tail.rows.size() == 9);
    CHECK(tail.rows[0][0] == "5th Percentile Difference");

    const CsvTable counts = read_csv(out / "class_counts.csv");
    CHECK(counts.rows.size() == 6);

    CHECK(std::filesystem::exists(out / "recall.csv"));
    CHECK(std::filesystem::exists(out / "results.json"));
    CHECK(std::filesystem::exists(out / "manifest.json"));
}

TEST_CASE("cli compare: local providers are deterministic across runs") {
    const auto& dir = workspace();
    const auto out_a = fresh_dir("det_a");
    const auto out_b = fresh_dir("det_b");
    const std::string base = "compare --config " + (dir / "config.cfg").string() +
                             " --queries " + (dir / "queries.jsonl").string() +
                             " --local-providers --out ";
    REQUIRE(run_cli(base + out_a.string()).exit_code == 0);
    REQUIRE(run_cli(base + out_b.string()).exit_code == 0);
    for (const char* name : {"class_scores.csv", "tail_risk.csv", "class_counts.csv",
                             "scores.csv", "recall.csv", "results.json", "manifest.json"}) {
        CAPTURE(name);
        CHECK(read_text_file(out_a / name) == read_text_file(out_b / name));
    }
}

TEST_CASE("cli ablate: default grid emits the five published rows and sub-run dirs") {
    const auto& dir = workspace();
    const auto out = fresh_dir("ablate_out");
    write_text_file(dir / "grid.cfg", "corpus = corpus.jsonl\n"
                                      "corpus_format = jsonl\n"
                                      "queries = queries.jsonl\n"
                                      "lexicon = lexicon.txt\n"
                                      "entities = entities.txt\n"
                                      "providers = local\n"
                                      "k = 3\n"
                                      "ks = 3\n");
    const CliResult r =
        run_cli("ablate --grid " + (dir / "grid.cfg").string() + " --out " + out.string());
    CHECK(r.exit_code == 0);

    const CsvTable ablation = read_csv(out / "ablation.csv");
    REQUIRE(ablation.rows.size() == 5);
    CHECK(ablation.rows[0][0] == "No Semantic Tags");
    CHECK(ablation.rows[1][0] == "No Topics");
    CHECK(ablation.rows[2][0] == "No Chunk Type");
    CHECK(ablation.rows[3][0] == "No KG Triples");
    CHECK(ablation.rows[4][0] == "No Sentiment");

    CHECK(std::filesystem::exists(out / "FULL" / "k3" / "manifest.json"));
    CHECK(std::filesystem::exists(out / "no_topics" / "k3" / "manifest.json"));
    CHECK(std::filesystem::exists(out / "PRAG" / "k3" / "manifest.json"));
    CHECK(std::filesystem::exists(out / "ksweep_class_scores_k3.csv"));
    CHECK(std::filesystem::exists(out / "grid_manifest.json"));
}

TEST_CASE("cli ablate: a single custom mask and k produce exactly one extra sub-run") {
    const auto& dir = workspace();
    const auto out = fresh_dir("ablate_single");
    write_text_file(dir / "grid_single.cfg", "corpus = corpus.jsonl\n"
                                             "queries = queries.jsonl\n"
                                             "lexicon = lexicon.txt\n"
                                             "entities = entities.txt\n"
                                             "providers = local\n"
                                             "k = 3\n"
                                             "masks = no_topics\n"
                                             "ks = 3\n");
    const CliResult r =
        run_cli("ablate --grid " + (dir / "grid_single.cfg").string() + " --out " + out.string());
    CHECK(r.exit_code == 0);
    const CsvTable ablation = read_csv(out / "ablation.csv");
    CHECK(ablation.rows.size() == 1);
    CHECK(ablation.rows[0][0] == "No Topics");
    CHECK(std::filesystem::exists(out / "no_topics" / "k3"));
    CHECK(!std::filesystem::exists(out / "no_sentiment"));
}

TEST_CASE("cli ablate: completed sub-runs are reused on re-invocation") {
    const auto& dir = workspace();
    const auto out = fresh_dir("ablate_resume");
    const std::string invoke =
        "ablate --grid " + (dir / "grid.cfg").string() + " --out " + out.string();
    REQUIRE(run_cli(invoke).exit_code == 0);

    // Tamper with one completed sub-run; if the re-invocation recomputed it,
    // the report would revert to the true scores.
    const auto scores_path = out / "no_sentiment" / "k3" / "scores.csv";
    CsvTable table = read_csv(scores_path);
    for (CsvRow& row : table.rows)
        row[2] = "1";
    write_csv(scores_path, table);
    std::filesystem::remove(out / "ablation.csv");

    REQUIRE(run_cli(invoke).exit_code == 0);
    const CsvTable ablation = read_csv(out / "ablation.csv");
    bool saw_tampered_row = false;
    for (const CsvRow& row : ablation.rows)
        if (row[0] == "No Sentiment" && std::stod(row[1]) < -50.0)
            saw_tampered_row = true;
    CHECK(saw_tampered_row);
}

TEST_CASE("cli report: prints every table it finds and fails on empty dirs") {
    const auto& dir = workspace();
    const auto out = fresh_dir("report_src");
    REQUIRE(run_cli("compare --config " + (dir / "config.cfg").string() + " --queries " +
                    (dir / "queries.jsonl").string() + " --out " + out.string())
                .exit_code == 0);
    const CliResult r = run_cli("report --in " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("class_scores.csv") != std::string::npos);
    CHECK(r.output.find("All Queries") != std::string::npos);

    const auto empty = fresh_dir("report_empty");
    CHECK(run_cli("report --in " + empty.string()).exit_code != 0);
}

TEST_CASE("cli: unknown flags and missing subcommands fail") {
    CHECK(run_cli("").exit_code != 0);
    CHECK(run_cli("compare --nonsense").exit_code != 0);
}
