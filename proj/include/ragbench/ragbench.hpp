#pragma once

#include "ragbench/chunker.hpp"
#include "ragbench/config.hpp"
#include "ragbench/corpus.hpp"
#include "ragbench/embed.hpp"
#include "ragbench/error.hpp"
#include "ragbench/llm.hpp"
#include "ragbench/metrics.hpp"
#include "ragbench/rag.hpp"
#include "ragbench/sweep.hpp"
#include "ragbench/vectorstore.hpp"
