#include "adaptrank/cross_validate.hpp"

#include "adaptrank/error.hpp"
#include "adaptrank/rerank.hpp"
#include "adaptrank/rng.hpp"

namespace adaptrank {

std::vector<PairExample> prepare_examples(const std::vector<SyntheticTriple>& triples,
                                          const InvertedIndex& index) {
  std::vector<PairExample> out;
  out.reserve(triples.size());
  for (const auto& t : triples) out.push_back(make_example(t.query.tokens, t.pos_doc_id, t.neg_doc_id, index));
  return out;
}

std::vector<PairExample> prepare_examples(const std::vector<TrainingTriple>& triples,
                                          const QueryMap& queries, const InvertedIndex& index) {
  std::vector<PairExample> out;
  out.reserve(triples.size());
  for (const auto& t : triples) {
    auto q = queries.find(t.query_id);
    if (q == queries.end()) throw Error("query '" + t.query_id + "' has no text");
    out.push_back(make_example(q->second.tokens, t.pos_doc_id, t.neg_doc_id, index));
  }
  return out;
}

CvReport cross_validate(const InvertedIndex& index, const QueryMap& queries, const Qrels& qrels,
                        const RunFile& first_stage, std::span<const PairExample> synth,
                        const CvConfig& config) {
  const FoldAssignment folds = make_folds(first_stage.query_ids(), config.folds, mix_seed(config.seed, 21));
  CvReport report;
  report.run.tag = config.mode == TrainMode::Meta ? "meta" : "uniform";
  for (std::size_t f = 0; f < folds.k; ++f) {
    const auto train_ids = folds.complement(f);
    const auto test_ids = folds.members(f);
    const auto triples = build_triples(qrels.restricted_to(train_ids),
                                       first_stage.restricted_to(train_ids).candidates(config.depth),
                                       config.per_pos, mix_seed(config.seed, 100 + f));
    const auto target = prepare_examples(triples, queries, index);

    FoldOutcome outcome{f, test_ids, triples.size(),
                        RankerParams::random(config.arch, config.hidden, mix_seed(config.seed, 200 + f), config.init_scale),
                        TrainResult{TrainerState(RankerParams::zeros(config.arch, config.hidden)), {}},
                        {}};
    TrainConfig train_config = config.train;
    train_config.seed = mix_seed(config.train.seed, 300 + f);
    outcome.training = train(train_config, outcome.init, synth, target, config.mode);

    const RunFile fold_run = rerank(outcome.training.state.params, index, queries,
                                    first_stage.restricted_to(test_ids), config.depth, report.run.tag);
    outcome.report = evaluate(fold_run, qrels, config.metrics);
    for (const auto& [q, entries] : fold_run.queries) report.run.queries.emplace(q, entries);
    report.folds.push_back(std::move(outcome));
  }
  report.pooled = evaluate(report.run, qrels, config.metrics);
  return report;
}

CvReport cross_validate(const InvertedIndex& index, const QueryMap& queries, const Qrels& qrels,
                        const RunFile& first_stage, const std::vector<SyntheticTriple>& synth,
                        const CvConfig& config) {
  const auto examples = prepare_examples(synth, index);
  return cross_validate(index, queries, qrels, first_stage, examples, config);
}

}  // namespace adaptrank
