#include "dforge/engine/conformance.hpp"

#include "dforge/engine/parser.hpp"

namespace dforge::engine {

namespace {

class Collector : public ViolationSink {
public:
    void report(Violation v) override { violations.push_back(std::move(v)); }
    std::vector<Violation> violations;
};

}  // namespace

std::vector<Violation> check_conformance(const std::string& sql, const DialectMode& mode) {
    Collector sink;
    try {
        parse_sql_collecting(sql, mode, sink);
    } catch (const EngineError& e) {
        Violation v;
        v.construct = engine_error_class_tag(e.error_class());
        v.dialect = mode.dialect;
        v.position = e.position() == EngineError::no_position ? 0 : e.position();
        v.length = 0;
        v.message = e.what();
        sink.violations.push_back(std::move(v));
    }
    return sink.violations;
}

}  // namespace dforge::engine
