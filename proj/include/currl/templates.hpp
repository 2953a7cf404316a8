#pragma once

#include <map>
#include <string>
#include <string_view>

namespace currl {

using TemplateVars = std::map<std::string, std::string>;

// Minimal mustache subset: {{name}} substitutes a variable, and
// {{#name}}...{{/name}} keeps its body only when the variable is non-empty.
// Unknown variables and unbalanced sections raise ArgumentError.
std::string render_template(std::string_view tmpl, const TemplateVars& vars);

// Splits a template file into its "[[section]]" blocks, in file order.
std::map<std::string, std::string> split_sections(std::string_view text);

std::string load_template(const std::string& path);

// Path of a template shipped in the repository's templates/ directory.
std::string default_template_path(std::string_view file_name);

}  // namespace currl
