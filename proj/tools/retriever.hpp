#pragma once

#include "spo/package.hpp"

namespace spo {

/// Plain HTTP(S) GET of a policy page; nullopt unless the server answers 200.
PolicyRetriever http_retriever();

}  // namespace spo
