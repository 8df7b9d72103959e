#pragma once

#include <stdexcept>
#include <string>

namespace cograph {

struct IllegalTransition : std::runtime_error {
    explicit IllegalTransition(const std::string& what) : std::runtime_error(what) {}
};

struct TargetIsStart : std::runtime_error {
    explicit TargetIsStart(const std::string& node_id)
        : std::runtime_error("start nodes are immutable: " + node_id) {}
};

struct UnknownEdge : std::runtime_error {
    explicit UnknownEdge(const std::string& edge_id)
        : std::runtime_error("unknown edge: " + edge_id) {}
};

struct InaccessiblePage : std::runtime_error {
    InaccessiblePage() : std::runtime_error("inaccessible page has no composites") {}
    explicit InaccessiblePage(const std::string& what) : std::runtime_error(what) {}
};

struct GraphStructureError : std::runtime_error {
    explicit GraphStructureError(const std::string& what) : std::runtime_error(what) {}
};

struct FixtureMiss : std::runtime_error {
    explicit FixtureMiss(const std::string& key)
        : std::runtime_error("no fixture entry for: " + key) {}
};

struct UnparsableQuery : std::runtime_error {
    explicit UnparsableQuery(const std::string& what) : std::runtime_error(what) {}
};

struct BackendFailure : std::runtime_error {
    explicit BackendFailure(const std::string& what) : std::runtime_error(what) {}
};

struct DeadlineSearchRejected : std::runtime_error {
    DeadlineSearchRejected()
        : std::runtime_error("soft deadline reached: call finish() to write the report") {}
    explicit DeadlineSearchRejected(const std::string& what) : std::runtime_error(what) {}
};

struct HardCeilingReached : std::runtime_error {
    explicit HardCeilingReached(int limit)
        : std::runtime_error("hard iteration ceiling reached: " + std::to_string(limit)) {}
};

struct NoWritableContent : std::runtime_error {
    NoWritableContent() : std::runtime_error("graph has no findings to write about") {}
    explicit NoWritableContent(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientEvidence : std::runtime_error {
    explicit InsufficientEvidence(const std::string& what) : std::runtime_error(what) {}
};

struct MalformedLog : std::runtime_error {
    explicit MalformedLog(const std::string& what) : std::runtime_error(what) {}
};

struct AuditFailure : std::runtime_error {
    explicit AuditFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cograph
