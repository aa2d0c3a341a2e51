#include "skmt/corpus.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace skmt {

namespace {

// Decodes one UTF-8 code point starting at s[i]; advances i past it.
// Malformed bytes are treated as Latin-1 so tokenization never fails.
char32_t next_codepoint(const std::string& s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    const unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return b0;
    }
    if (i + len > s.size()) {
        ++i;
        return b0;
    }
    for (int k = 1; k < len; ++k) {
        if ((byte(i + k) & 0xC0) != 0x80) {
            ++i;
            return b0;
        }
        cp = (cp << 6) | (byte(i + k) & 0x3F);
    }
    i += len;
    return cp;
}

bool is_space(char32_t cp) {
    switch (cp) {
        case U'\t':
        case U'\n':
        case U'\v':
        case U'\f':
        case U'\r':
        case U' ':
        case 0x0085:  // next line
        case 0x00A0:  // no-break space
        case 0x1680:
        case 0x2028:
        case 0x2029:
        case 0x202F:
        case 0x205F:
        case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

void append_codepoint(std::string& out, const std::string& src, std::size_t begin, std::size_t end,
                      bool lowercase) {
    for (std::size_t k = begin; k < end; ++k) {
        char c = src[k];
        if (lowercase && c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
        out.push_back(c);
    }
}

[[noreturn]] void line_error(const std::string& path, std::size_t line_no, const std::string& what) {
    std::ostringstream os;
    os << path << ":" << line_no << ": " << what;
    throw std::runtime_error(os.str());
}

}  // namespace

std::vector<Token> tokenize(const std::string& text, bool lowercase) {
    std::vector<Token> out;
    Token current;
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t start = i;
        const char32_t cp = next_codepoint(text, i);
        if (is_space(cp)) {
            if (!current.empty()) {
                out.push_back(std::move(current));
                current.clear();
            }
        } else {
            append_codepoint(current, text, start, i, lowercase);
        }
    }
    if (!current.empty()) {
        out.push_back(std::move(current));
    }
    return out;
}

const SentencePair& ParallelCorpus::add_pair(std::vector<Token> source, std::vector<Token> target) {
    if (source.empty() || target.empty()) {
        throw std::runtime_error("sentence pair must have non-empty source and target");
    }
    SentencePair p;
    p.id = static_cast<std::uint32_t>(pairs_.size());
    p.source = std::move(source);
    p.target = std::move(target);
    for (const Token& t : p.target) {
        ++token_counts_[t];
    }
    pairs_.push_back(std::move(p));
    return pairs_.back();
}

std::uint64_t ParallelCorpus::target_count(const Token& t) const {
    auto it = token_counts_.find(t);
    return it == token_counts_.end() ? 0 : it->second;
}

ParallelCorpus load_corpus(const std::string& path, CorpusFormat format, bool lowercase) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open corpus file: " + path);
    }
    ParallelCorpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        std::string src_text;
        std::string tgt_text;
        if (format == CorpusFormat::tsv) {
            const std::size_t first = line.find('\t');
            if (first == std::string::npos || line.find('\t', first + 1) != std::string::npos) {
                line_error(path, line_no, "expected exactly 2 tab-separated columns");
            }
            src_text = line.substr(0, first);
            tgt_text = line.substr(first + 1);
        } else {
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object()) {
                line_error(path, line_no, "invalid JSON object");
            }
            if (!j.contains("src") || !j["src"].is_string()) {
                line_error(path, line_no, "missing \"src\" field");
            }
            if (!j.contains("tgt") || !j["tgt"].is_string()) {
                line_error(path, line_no, "missing \"tgt\" field");
            }
            src_text = j["src"].get<std::string>();
            tgt_text = j["tgt"].get<std::string>();
        }
        std::vector<Token> src = tokenize(src_text, lowercase);
        std::vector<Token> tgt = tokenize(tgt_text, lowercase);
        if (src.empty()) {
            line_error(path, line_no, "empty source after tokenization");
        }
        if (tgt.empty()) {
            line_error(path, line_no, "empty target after tokenization");
        }
        corpus.add_pair(std::move(src), std::move(tgt));
    }
    return corpus;
}

namespace {

std::string join(const std::vector<Token>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace

void save_corpus(const ParallelCorpus& corpus, const std::string& path, CorpusFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write corpus file: " + path);
    }
    for (const SentencePair& p : corpus.pairs()) {
        if (format == CorpusFormat::tsv) {
            out << join(p.source) << '\t' << join(p.target) << '\n';
        } else {
            nlohmann::json j;
            j["src"] = join(p.source);
            j["tgt"] = join(p.target);
            out << j.dump() << '\n';
        }
    }
}

Vocabulary::Vocabulary() {
    // Reserved surfaces; corpus tokens equal to one of these map to the
    // same id.
    for (const char* s : {"<s>", "</s>", "<unk>", "<pad>"}) {
        const TokenId id = static_cast<TokenId>(id_to_token_.size());
        token_to_id_.emplace(s, id);
        id_to_token_.emplace_back(s);
    }
}

TokenId Vocabulary::add(const Token& t) {
    auto it = token_to_id_.find(t);
    if (it != token_to_id_.end()) {
        return it->second;
    }
    const TokenId id = static_cast<TokenId>(id_to_token_.size());
    token_to_id_.emplace(t, id);
    id_to_token_.push_back(t);
    return id;
}

TokenId Vocabulary::id_or_unk(const Token& t) const {
    auto it = token_to_id_.find(t);
    return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const Token& t) const { return token_to_id_.count(t) > 0; }

const Token& Vocabulary::token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
        throw std::out_of_range("token id out of range");
    }
    return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::ids_or_unk(const std::vector<Token>& tokens) const {
    std::vector<TokenId> out;
    out.reserve(tokens.size());
    for (const Token& t : tokens) {
        out.push_back(id_or_unk(t));
    }
    return out;
}

std::vector<Token> Vocabulary::tokens(const std::vector<TokenId>& ids) const {
    std::vector<Token> out;
    out.reserve(ids.size());
    for (TokenId id : ids) {
        out.push_back(token(id));
    }
    return out;
}

void Vocabulary::save(const std::string& path) const {
    // nlohmann objects serialize with sorted keys, so the bytes are a
    // pure function of the map contents.
    nlohmann::json j;
    for (std::size_t id = 0; id < id_to_token_.size(); ++id) {
        j[id_to_token_[id]] = id;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write vocabulary file: " + path);
    }
    out << j.dump(2) << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open vocabulary file: " + path);
    }
    nlohmann::json j;
    in >> j;
    if (!j.is_object()) {
        throw std::runtime_error("vocabulary file must contain a JSON object");
    }
    std::vector<Token> by_id(j.size());
    std::vector<bool> seen(j.size(), false);
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto id = it.value().get<std::size_t>();
        if (id >= by_id.size() || seen[id]) {
            throw std::runtime_error("vocabulary ids must be dense and unique");
        }
        seen[id] = true;
        by_id[id] = it.key();
    }
    Vocabulary v;
    for (std::size_t id = 0; id < by_id.size(); ++id) {
        if (id < 4) {
            if (by_id[id] != v.token(static_cast<TokenId>(id))) {
                throw std::runtime_error("vocabulary ids 0-3 must be the reserved specials");
            }
            continue;
        }
        v.add(by_id[id]);
    }
    return v;
}

Vocabulary build_vocabulary(const ParallelCorpus& corpus) {
    Vocabulary v;
    for (const SentencePair& p : corpus.pairs()) {
        for (const Token& t : p.source) {
            v.add(t);
        }
        for (const Token& t : p.target) {
            v.add(t);
        }
    }
    return v;
}

}  // namespace skmt
