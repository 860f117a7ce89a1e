#include <string>

#include <benchmark/benchmark.h>

#include "facteval/corpus.hpp"
#include "facteval/evalharness.hpp"
#include "facteval/util/text.hpp"

namespace {

std::string synthetic_article(std::size_t sentences) {
  std::string text;
  for (std::size_t s = 0; s < sentences; ++s) {
    text += "Sentence number " + std::to_string(s) +
            " talks about Dr. Smith and the U.S. history of computing machines. ";
  }
  return text;
}

void BM_SentenceSplit(benchmark::State& state) {
  std::string article = synthetic_article(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto sentences = facteval::text::split_sentence_strings(article);
    benchmark::DoNotOptimize(sentences.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(article.size()));
}
BENCHMARK(BM_SentenceSplit)->Arg(16)->Arg(256);

void BM_ChunkDocument(benchmark::State& state) {
  facteval::corpus::Document doc{"Bench",
                                 synthetic_article(static_cast<std::size_t>(state.range(0)))};
  for (auto _ : state) {
    auto passages = facteval::corpus::chunk_document(doc, 256);
    benchmark::DoNotOptimize(passages.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ChunkDocument)->Arg(64)->Arg(1024);

void BM_TokenF1(benchmark::State& state) {
  std::string a = synthetic_article(4);
  std::string b = synthetic_article(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(facteval::evalharness::token_f1(a, b));
  }
}
BENCHMARK(BM_TokenF1);

}  // namespace
