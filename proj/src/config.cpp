#include "srag/config.hpp"

#include "srag/errors.hpp"
#include "srag/util.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

namespace srag {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

} // namespace

std::map<std::string, std::string> parse_key_value_file(const std::string& content,
                                                        const std::string& origin) {
    std::map<std::string, std::string> kv;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start <= content.size()) {
        std::size_t nl = content.find('\n', start);
        if (nl == std::string::npos)
            nl = content.size();
        std::string_view line = trim(std::string_view(content).substr(start, nl - start));
        start = nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#')
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw IoError(origin + " line " + std::to_string(line_no) +
                          ": expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty())
            throw IoError(origin + " line " + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw IoError(origin + " line " + std::to_string(line_no) + ": duplicate key '" +
                          key + "'");
    }
    return kv;
}

namespace {

long to_int(const std::string& value, const std::string& key) {
    long out = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size())
        throw IoError("config key '" + key + "': not an integer: '" + value + "'");
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    const std::filesystem::path p(value);
    return p.is_absolute() ? p : base / p;
}

} // namespace

AblationMask parse_mask_spec(const std::string& spec) {
    const std::string lower = [&] {
        std::string s = spec;
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return s;
    }();
    if (lower.empty() || lower == "full")
        return AblationMask::full();

    if (lower.starts_with("bits:")) {
        const std::string bits = lower.substr(5);
        if (bits.size() != 5 || bits.find_first_not_of("01") != std::string::npos)
            throw InvalidArgument("mask spec: bits form needs exactly five 0/1 digits: '" +
                                  spec + "'");
        AblationMask m;
        m.semantic_tags = bits[0] == '1';
        m.topics = bits[1] == '1';
        m.chunk_type = bits[2] == '1';
        m.kg_triples = bits[3] == '1';
        m.sentiment = bits[4] == '1';
        return m;
    }

    AblationMask m = AblationMask::full();
    std::size_t start = 0;
    while (start <= lower.size()) {
        std::size_t comma = lower.find(',', start);
        if (comma == std::string::npos)
            comma = lower.size();
        const std::string_view token = trim(std::string_view(lower).substr(start, comma - start));
        start = comma + 1;
        if (token.empty())
            continue;
        if (token == "no_semantic_tags")
            m.semantic_tags = false;
        else if (token == "no_topics")
            m.topics = false;
        else if (token == "no_chunk_type")
            m.chunk_type = false;
        else if (token == "no_kg_triples")
            m.kg_triples = false;
        else if (token == "no_sentiment")
            m.sentiment = false;
        else
            throw InvalidArgument("mask spec: unknown token '" + std::string(token) + "'");
    }
    return m;
}

std::string mask_label(const AblationMask& mask) {
    if (mask == AblationMask::full())
        return "FULL";
    for (const auto& [label, m] : leave_one_out_masks()) {
        if (mask == m) {
            std::string out;
            for (char c : label)
                out.push_back(c == ' ' ? '_' : static_cast<char>(std::tolower(
                                                   static_cast<unsigned char>(c))));
            return out;
        }
    }
    std::string bits = "bits_";
    bits += mask.semantic_tags ? '1' : '0';
    bits += mask.topics ? '1' : '0';
    bits += mask.chunk_type ? '1' : '0';
    bits += mask.kg_triples ? '1' : '0';
    bits += mask.sentiment ? '1' : '0';
    return bits;
}

bool apply_config_key(AppConfig& config, const std::string& key, const std::string& value,
                      const std::filesystem::path& base) {
    PipelineConfig& p = config.pipeline;
    {
        if (key == "mode") {
            if (value == "plain")
                p.mode = IndexMode::plain;
            else if (value == "structured")
                p.mode = IndexMode::structured;
            else
                throw IoError("config key 'mode': expected plain or structured, got '" + value +
                              "'");
        } else if (key == "mask") {
            p.mask = parse_mask_spec(value);
        } else if (key == "k") {
            const long k = to_int(value, key);
            if (k <= 0)
                throw IoError("config key 'k' must be positive");
            p.k = static_cast<std::size_t>(k);
        } else if (key == "max_chars") {
            p.chunking.max_chars = static_cast<std::size_t>(to_int(value, key));
        } else if (key == "overlap") {
            p.chunking.overlap = static_cast<std::size_t>(to_int(value, key));
        } else if (key == "embedding_dim") {
            p.embedding_dim = static_cast<int>(to_int(value, key));
        } else if (key == "providers") {
            if (value == "local")
                p.local_providers = true;
            else if (value == "remote")
                p.local_providers = false;
            else
                throw IoError("config key 'providers': expected local or remote");
        } else if (key == "threads") {
            p.threads = static_cast<std::size_t>(std::max(1L, to_int(value, key)));
        } else if (key == "corpus") {
            config.corpus = resolve(base, value);
        } else if (key == "corpus_format") {
            if (value == "jsonl")
                config.corpus_format = CorpusFormat::jsonl;
            else if (value == "plain_dir")
                config.corpus_format = CorpusFormat::plain_dir;
            else
                throw IoError("config key 'corpus_format': expected jsonl or plain_dir");
        } else if (key == "lexicon") {
            p.lexicon_path = resolve(base, value);
        } else if (key == "entities") {
            p.entities_path = resolve(base, value);
        } else if (key == "base_url") {
            p.remote.base_url = value;
        } else if (key == "embed_model") {
            p.remote.embed_model = value;
        } else if (key == "answer_model") {
            p.remote.answer_model = value;
        } else if (key == "tagger_model") {
            p.remote.tagger_model = value;
        } else if (key == "judge_model") {
            p.remote.judge_model = value;
        } else if (key == "judge_base_url") {
            p.remote.judge_base_url = value;
        } else if (key == "api_key_env") {
            p.remote.api_key_env = value;
        } else if (key == "timeout_seconds") {
            p.remote.timeout_seconds = static_cast<int>(to_int(value, key));
        } else if (key == "max_retries") {
            p.remote.max_retries = static_cast<int>(to_int(value, key));
        } else if (key == "max_in_flight") {
            p.remote.max_in_flight = static_cast<int>(to_int(value, key));
        } else if (key == "min_request_interval_ms") {
            p.remote.min_request_interval_ms = static_cast<int>(to_int(value, key));
        } else if (key == "embed_batch_size") {
            p.remote.embed_batch_size = static_cast<std::size_t>(to_int(value, key));
        } else {
            return false;
        }
    }
    return true;
}

AppConfig load_app_config(const std::filesystem::path& path) {
    const std::string content = read_text_file(path);
    const auto kv = parse_key_value_file(content, "config " + path.string());
    const std::filesystem::path base =
        path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

    AppConfig config;
    for (const auto& [key, value] : kv) {
        if (!apply_config_key(config, key, value, base))
            throw IoError("config " + path.string() + ": unknown key '" + key + "'");
    }
    if (config.pipeline.chunking.overlap >= config.pipeline.chunking.max_chars)
        throw IoError("config: overlap must be smaller than max_chars");
    return config;
}

std::string config_snapshot(const AppConfig& config) {
    const PipelineConfig& p = config.pipeline;
    std::ostringstream out;
    out << "mode = " << to_string(p.mode) << "\n";
    out << "mask = " << mask_label(p.mask) << "\n";
    out << "k = " << p.k << "\n";
    out << "max_chars = " << p.chunking.max_chars << "\n";
    out << "overlap = " << p.chunking.overlap << "\n";
    out << "embedding_dim = " << p.embedding_dim << "\n";
    out << "providers = " << (p.local_providers ? "local" : "remote") << "\n";
    out << "threads = " << p.threads << "\n";
    out << "corpus = " << config.corpus.generic_string() << "\n";
    out << "corpus_format = " << (config.corpus_format == CorpusFormat::jsonl ? "jsonl" : "plain_dir")
        << "\n";
    out << "lexicon = " << p.lexicon_path.generic_string() << "\n";
    out << "entities = " << p.entities_path.generic_string() << "\n";
    if (!p.local_providers) {
        out << "base_url = " << p.remote.base_url << "\n";
        out << "embed_model = " << p.remote.embed_model << "\n";
        out << "answer_model = " << p.remote.answer_model << "\n";
        out << "tagger_model = " << p.remote.tagger_model << "\n";
        out << "judge_model = " << p.remote.judge_model << "\n";
        out << "judge_base_url = " << p.remote.judge_base_url << "\n";
        out << "api_key_env = " << p.remote.api_key_env << "\n";
        out << "embed_batch_size = " << p.remote.embed_batch_size << "\n";
    }
    return out.str();
}

} // namespace srag
