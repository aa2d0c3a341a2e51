#pragma once

#include <string>
#include <vector>

#include "skmt/corpus.hpp"
#include "skmt/fusion.hpp"
#include "skmt/metrics.hpp"
#include "skmt/model.hpp"

namespace skmt {

// A document to translate in order, feeding each gold pair back into
// the retrieval corpus after its sentence is translated.
struct Document {
    std::string doc_id;
    std::vector<SentencePair> pairs;  // sentence order preserved

    // Length bucket: [0,50), [50,100), [100,200), [200,500), [500,1000).
    // Longer documents keep the last label.
    std::string bucket() const;
};

struct OnlineSentence {
    std::vector<Token> hypothesis;
    std::vector<StepTrace> trace;
};

struct OnlineRunResult {
    std::vector<OnlineSentence> sentences;  // one per document sentence
    RIndicatorReport r_report;
    MetricReport metrics;
};

// Translates the document sentence by sentence against an initially
// empty corpus and index; after sentence j is translated, pair j is
// inserted, so sentence j never sees pair j or later. The model is
// never updated. Strictly sequential per document.
OnlineRunResult run_online(const Document& doc, const ContextModel& model,
                           const Vocabulary& vocab, const FusionConfig& fcfg,
                           const DecoderConfig& dcfg, const RetrievalConfig& rcfg = {});

// Reads documents from JSONL lines {"src": ..., "tgt": ..., "doc_id"?: ...};
// lines group into documents by doc_id (file order preserved, missing
// doc_id means one unnamed document).
std::vector<Document> load_documents(const std::string& path, bool lowercase = false);

}  // namespace skmt
