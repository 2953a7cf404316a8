#include "currl/templates.hpp"

#include "currl/error.hpp"
#include "currl/text.hpp"

#ifndef CURRL_DEFAULT_TEMPLATE_DIR
#define CURRL_DEFAULT_TEMPLATE_DIR "templates"
#endif

namespace currl {

namespace {

std::string render_range(std::string_view tmpl, const TemplateVars& vars) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        out.append(tmpl.substr(pos, open - pos));
        const auto close = tmpl.find("}}", open);
        if (close == std::string_view::npos) throw ArgumentError("unterminated {{ in template");
        const std::string tag(tmpl.substr(open + 2, close - open - 2));
        pos = close + 2;

        if (!tag.empty() && tag[0] == '#') {
            const std::string name = tag.substr(1);
            const std::string end_tag = "{{/" + name + "}}";
            const auto end = tmpl.find(end_tag, pos);
            if (end == std::string_view::npos)
                throw ArgumentError("unclosed section {{#" + name + "}}");
            auto it = vars.find(name);
            if (it == vars.end()) throw ArgumentError("unknown template variable: " + name);
            std::string_view body = tmpl.substr(pos, end - pos);
            // A section on its own line swallows that line break.
            if (!body.empty() && body.front() == '\n') body.remove_prefix(1);
            if (!it->second.empty()) out += render_range(body, vars);
            pos = end + end_tag.size();
            if (pos < tmpl.size() && tmpl[pos] == '\n') ++pos;
        } else if (!tag.empty() && tag[0] == '/') {
            throw ArgumentError("stray section close {{" + tag + "}}");
        } else {
            auto it = vars.find(tag);
            if (it == vars.end()) throw ArgumentError("unknown template variable: " + tag);
            out += it->second;
        }
    }
    return out;
}

}  // namespace

std::string render_template(std::string_view tmpl, const TemplateVars& vars) {
    return render_range(tmpl, vars);
}

std::map<std::string, std::string> split_sections(std::string_view text) {
    std::map<std::string, std::string> out;
    std::string current;
    std::string body;
    bool in_section = false;
    std::size_t pos = 0;
    auto flush = [&] {
        if (in_section) out[current] = trim(body);
        body.clear();
    };
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        if (line.size() > 4 && line.substr(0, 2) == "[[" && line.substr(line.size() - 2) == "]]") {
            flush();
            current = std::string(line.substr(2, line.size() - 4));
            in_section = true;
        } else if (in_section) {
            body.append(line);
            body.push_back('\n');
        }
        pos = nl + 1;
    }
    flush();
    return out;
}

std::string load_template(const std::string& path) { return read_file(path); }

std::string default_template_path(std::string_view file_name) {
    return std::string(CURRL_DEFAULT_TEMPLATE_DIR) + "/" + std::string(file_name);
}

}  // namespace currl
