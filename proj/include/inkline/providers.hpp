#pragma once

#include "inkline/intent.hpp"

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

namespace inkline::providers {

// Rule-based suite; every call is a pure function of its arguments.
class FallbackProvider : public ProviderSuite {
public:
    std::string name() const override { return "fallback"; }
    std::vector<std::string> relevance(std::string_view chunk, const DatasetMeta& meta) override;
    std::string filter(std::string_view chunk, const DatasetMeta& meta) override;
    std::vector<std::string> time_columns(const std::vector<ColumnMeta>& columns) override;
    std::vector<RgbaImage> images_from_text(std::string_view keyword) override;
    Embedding embed(std::string_view text) override;
};

struct RemoteOptions {
    std::string url; // http://host:port/path
    std::chrono::milliseconds timeout{10000};
    int retries = 1;
    int concurrency = 4;

    // INKLINE_PROVIDER_URL, INKLINE_PROVIDER_TIMEOUT_MS, INKLINE_PROVIDER_RETRIES,
    // INKLINE_PROVIDER_CONCURRENCY.
    static RemoteOptions from_env();
};

inline constexpr int kProtocolVersion = 1;

// POSTs {version, task, chunk, meta} and validates the per-task reply:
//   relevance / time_columns -> {"columns": [name...]}
//   filter                   -> {"query": text}
//   images                   -> {"images": [{"width", "height", "rgba": [bytes...]}]}
//   embed                    -> {"vector": [256 numbers]}
// Any transport or schema failure throws ProviderError("remote").
class RemoteProvider : public ProviderSuite {
public:
    explicit RemoteProvider(RemoteOptions options);
    std::string name() const override { return "remote"; }
    std::vector<std::string> relevance(std::string_view chunk, const DatasetMeta& meta) override;
    std::string filter(std::string_view chunk, const DatasetMeta& meta) override;
    std::vector<std::string> time_columns(const std::vector<ColumnMeta>& columns) override;
    std::vector<RgbaImage> images_from_text(std::string_view keyword) override;
    Embedding embed(std::string_view text) override;

private:
    nlohmann::json call(std::string_view task, std::string_view chunk, nlohmann::json meta);

    RemoteOptions options_;
    std::string base_, path_;
    std::counting_semaphore<1024> slots_;
};

// Remote when INKLINE_PROVIDER_URL is set (or `which` == "remote"), else fallback.
std::unique_ptr<ProviderSuite> make_provider(std::string_view which = {});

} // namespace inkline::providers
