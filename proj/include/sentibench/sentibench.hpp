#pragma once

#include "sentibench/corpus.hpp"
#include "sentibench/crossval.hpp"
#include "sentibench/csr.hpp"
#include "sentibench/error.hpp"
#include "sentibench/gbdt.hpp"
#include "sentibench/linear.hpp"
#include "sentibench/metrics.hpp"
#include "sentibench/neural/checkpoint.hpp"
#include "sentibench/neural/network.hpp"
#include "sentibench/neural/params.hpp"
#include "sentibench/neural/search.hpp"
#include "sentibench/neural/train.hpp"
#include "sentibench/neural/vocab.hpp"
#include "sentibench/preprocess.hpp"
#include "sentibench/prng.hpp"
#include "sentibench/report.hpp"
#include "sentibench/slang_builtin.hpp"
#include "sentibench/synthetic.hpp"
#include "sentibench/tfidf.hpp"
