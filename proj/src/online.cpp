#include "skmt/online.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "skmt/retrieval.hpp"

namespace skmt {

std::string Document::bucket() const {
    const std::size_t n = pairs.size();
    if (n < 50) return "0-50";
    if (n < 100) return "50-100";
    if (n < 200) return "100-200";
    if (n < 500) return "200-500";
    return "500-1000";
}

OnlineRunResult run_online(const Document& doc, const ContextModel& model,
                           const Vocabulary& vocab, const FusionConfig& fcfg,
                           const DecoderConfig& dcfg, const RetrievalConfig& rcfg) {
    if (doc.pairs.empty()) {
        throw std::invalid_argument("document is empty");
    }
    OnlineRunResult result;
    result.sentences.reserve(doc.pairs.size());

    ParallelCorpus corpus;
    InvertedIndex index;
    for (const SentencePair& pair : doc.pairs) {
        BeamResult br = beam_search(model, vocab, index, corpus, pair.source, fcfg, dcfg, rcfg);
        OnlineSentence s;
        std::vector<TokenId> ids(br.best.tokens.begin() + 1, br.best.tokens.end());
        if (!ids.empty() && ids.back() == Vocabulary::kEos) {
            ids.pop_back();
        }
        s.hypothesis = vocab.tokens(ids);
        s.trace = std::move(br.best.trace);
        result.sentences.push_back(std::move(s));

        const SentencePair& stored = corpus.add_pair(pair.source, pair.target);
        insert_pair(index, stored);
    }

    std::vector<std::vector<Token>> hyps;
    std::vector<std::vector<Token>> refs;
    hyps.reserve(doc.pairs.size());
    refs.reserve(doc.pairs.size());
    for (std::size_t j = 0; j < doc.pairs.size(); ++j) {
        hyps.push_back(result.sentences[j].hypothesis);
        refs.push_back(doc.pairs[j].target);
    }
    result.r_report = r_indicator(hyps, refs);
    result.metrics.bleu = corpus_bleu(hyps, refs);
    result.metrics.chrf = chrf(hyps, refs);
    return result;
}

std::vector<Document> load_documents(const std::string& path, bool lowercase) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open document file: " + path);
    }
    std::vector<Document> docs;
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
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("src") || !j.contains("tgt")) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected a JSON object with \"src\" and \"tgt\"");
        }
        const std::string doc_id = j.value("doc_id", std::string());
        std::vector<Token> src = tokenize(j["src"].get<std::string>(), lowercase);
        std::vector<Token> tgt = tokenize(j["tgt"].get<std::string>(), lowercase);
        if (src.empty() || tgt.empty()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": empty source or target after tokenization");
        }
        Document* doc = nullptr;
        for (Document& d : docs) {
            if (d.doc_id == doc_id) {
                doc = &d;
                break;
            }
        }
        if (doc == nullptr) {
            docs.push_back(Document{doc_id, {}});
            doc = &docs.back();
        }
        SentencePair p;
        p.id = static_cast<std::uint32_t>(doc->pairs.size());
        p.source = std::move(src);
        p.target = std::move(tgt);
        doc->pairs.push_back(std::move(p));
    }
    return docs;
}

}  // namespace skmt
