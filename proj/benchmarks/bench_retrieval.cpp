#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "facteval/retrieval.hpp"

namespace {

std::vector<std::string> synthetic_corpus(std::size_t docs, std::size_t words_per_doc) {
  static const char* kVocab[] = {"ada",    "lovelace", "babbage", "engine", "program",
                                 "london", "math",     "poet",    "notes",  "history",
                                 "first",  "computer", "wrote",   "born",   "died"};
  std::mt19937 rng(12345);
  std::uniform_int_distribution<std::size_t> pick(0, std::size(kVocab) - 1);
  std::vector<std::string> out;
  out.reserve(docs);
  for (std::size_t d = 0; d < docs; ++d) {
    std::string text;
    for (std::size_t w = 0; w < words_per_doc; ++w) {
      if (!text.empty()) text += ' ';
      text += kVocab[pick(rng)];
    }
    out.push_back(std::move(text));
  }
  return out;
}

void BM_BuildIndex(benchmark::State& state) {
  auto corpus = synthetic_corpus(static_cast<std::size_t>(state.range(0)), 120);
  for (auto _ : state) {
    auto index = facteval::retrieval::InvertedIndex::build(corpus);
    benchmark::DoNotOptimize(index.item_count());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildIndex)->Arg(100)->Arg(1000)->Arg(5000);

void BM_TopK(benchmark::State& state) {
  auto corpus = synthetic_corpus(static_cast<std::size_t>(state.range(0)), 120);
  auto index = facteval::retrieval::InvertedIndex::build(corpus);
  for (auto _ : state) {
    auto hits = index.top_k("ada lovelace first computer program", 5);
    benchmark::DoNotOptimize(hits.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TopK)->Arg(100)->Arg(1000)->Arg(5000);

void BM_Tokenize(benchmark::State& state) {
  auto corpus = synthetic_corpus(1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto terms = facteval::retrieval::tokenize(corpus[0]);
    benchmark::DoNotOptimize(terms.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(corpus[0].size()));
}
BENCHMARK(BM_Tokenize)->Arg(128)->Arg(2048);

}  // namespace
