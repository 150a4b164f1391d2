// Small Scheme-subset evaluator speaking the doctest protocol: program on
// stdin, values printed via (display ...), exit 0 on success. Covers just
// enough of R7RS for list-manipulation doctests; it is a test utility, not a
// full interpreter.

#include <cstdint>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ilp/datum.hpp"

namespace {

using ilp::Datum;
using ilp::DatumPtr;

struct Env;
using EnvPtr = std::shared_ptr<Env>;

struct Closure {
  std::vector<std::string> params;
  std::vector<DatumPtr> body;
  EnvPtr env;
};

struct Value;
using ValuePtr = std::shared_ptr<Value>;

struct Value {
  std::variant<DatumPtr, Closure> v;
};

inline ValuePtr data(DatumPtr d) {
  return std::make_shared<Value>(Value{std::move(d)});
}

struct Env : std::enable_shared_from_this<Env> {
  std::map<std::string, ValuePtr> vars;
  EnvPtr parent;

  ValuePtr* find(const std::string& name) {
    if (auto it = vars.find(name); it != vars.end()) return &it->second;
    return parent ? parent->find(name) : nullptr;
  }
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::int64_t as_int(const ValuePtr& v) {
  const auto* d = std::get_if<DatumPtr>(&v->v);
  if (!d || (*d)->kind != Datum::Kind::Number)
    throw EvalError("expected a number");
  return std::stoll((*d)->atom);
}

DatumPtr as_datum(const ValuePtr& v) {
  const auto* d = std::get_if<DatumPtr>(&v->v);
  if (!d) throw EvalError("procedure used as a value");
  return *d;
}

DatumPtr int_datum(std::int64_t n) { return Datum::number(std::to_string(n)); }

bool truthy(const ValuePtr& v) {
  if (const auto* d = std::get_if<DatumPtr>(&v->v))
    return !((*d)->kind == Datum::Kind::Boolean && !(*d)->truth);
  return true;
}

std::vector<DatumPtr> as_list(const ValuePtr& v) {
  DatumPtr d = as_datum(v);
  if (d->kind != Datum::Kind::List) throw EvalError("expected a list");
  return d->items;
}

void display(const DatumPtr& d, std::ostream& os) { os << ilp::print_datum(d); }

ValuePtr eval(const DatumPtr& expr, const EnvPtr& env);

ValuePtr eval_body(const std::vector<DatumPtr>& body, const EnvPtr& env) {
  ValuePtr last = data(Datum::boolean(false));
  for (const auto& e : body) last = eval(e, env);
  return last;
}

ValuePtr apply_closure(const ValuePtr& fn, const std::vector<ValuePtr>& args) {
  const auto* clo = std::get_if<Closure>(&fn->v);
  if (!clo) throw EvalError("call of a non-procedure");
  if (clo->params.size() != args.size())
    throw EvalError("arity mismatch: expected " + std::to_string(clo->params.size()) +
                    " arguments, got " + std::to_string(args.size()));
  auto frame = std::make_shared<Env>();
  frame->parent = clo->env;
  for (std::size_t i = 0; i < args.size(); ++i) frame->vars[clo->params[i]] = args[i];
  return eval_body(clo->body, frame);
}

ValuePtr builtin(const std::string& name, const std::vector<ValuePtr>& args) {
  auto need = [&](std::size_t n) {
    if (args.size() != n) throw EvalError(name + ": arity mismatch");
  };
  if (name == "null?") {
    need(1);
    DatumPtr d = as_datum(args[0]);
    return data(Datum::boolean(d->kind == Datum::Kind::List && d->items.empty()));
  }
  if (name == "pair?") {
    need(1);
    DatumPtr d = as_datum(args[0]);
    return data(Datum::boolean(d->kind == Datum::Kind::List && !d->items.empty()));
  }
  if (name == "length") {
    need(1);
    return data(int_datum(static_cast<std::int64_t>(as_list(args[0]).size())));
  }
  if (name == "car") {
    need(1);
    auto xs = as_list(args[0]);
    if (xs.empty()) throw EvalError("car of empty list");
    return data(xs[0]);
  }
  if (name == "cdr") {
    need(1);
    auto xs = as_list(args[0]);
    if (xs.empty()) throw EvalError("cdr of empty list");
    return data(Datum::list({xs.begin() + 1, xs.end()}));
  }
  if (name == "cons") {
    need(2);
    auto tail = as_list(args[1]);
    std::vector<DatumPtr> xs{as_datum(args[0])};
    xs.insert(xs.end(), tail.begin(), tail.end());
    return data(Datum::list(std::move(xs)));
  }
  if (name == "list") {
    std::vector<DatumPtr> xs;
    for (const auto& a : args) xs.push_back(as_datum(a));
    return data(Datum::list(std::move(xs)));
  }
  if (name == "append") {
    std::vector<DatumPtr> xs;
    for (const auto& a : args)
      for (const auto& x : as_list(a)) xs.push_back(x);
    return data(Datum::list(std::move(xs)));
  }
  if (name == "reverse") {
    need(1);
    auto xs = as_list(args[0]);
    return data(Datum::list({xs.rbegin(), xs.rend()}));
  }
  if (name == "equal?") {
    need(2);
    return data(Datum::boolean(ilp::datum_equal(as_datum(args[0]), as_datum(args[1]))));
  }
  if (name == "not") {
    need(1);
    return data(Datum::boolean(!truthy(args[0])));
  }
  if (name == "display") {
    need(1);
    display(as_datum(args[0]), std::cout);
    return data(Datum::boolean(true));
  }
  if (name == "newline") {
    need(0);
    std::cout << '\n';
    return data(Datum::boolean(true));
  }
  if (name == "+" || name == "-" || name == "*") {
    if (args.empty() && name != "+") throw EvalError(name + ": arity mismatch");
    if (name == "+") {
      std::int64_t acc = 0;
      for (const auto& a : args) acc += as_int(a);
      return data(int_datum(acc));
    }
    std::int64_t acc = as_int(args[0]);
    if (name == "-" && args.size() == 1) return data(int_datum(-acc));
    for (std::size_t i = 1; i < args.size(); ++i)
      acc = name == "-" ? acc - as_int(args[i]) : acc * as_int(args[i]);
    return data(int_datum(acc));
  }
  if (name == "<" || name == ">" || name == "<=" || name == ">=" || name == "=") {
    need(2);
    std::int64_t a = as_int(args[0]), b = as_int(args[1]);
    bool r = name == "<" ? a < b : name == ">" ? a > b
             : name == "<=" ? a <= b : name == ">=" ? a >= b : a == b;
    return data(Datum::boolean(r));
  }
  throw EvalError("unbound procedure '" + name + "'");
}

bool is_builtin(const std::string& name) {
  static const std::vector<std::string> names = {
      "null?", "pair?", "length", "car", "cdr", "cons", "list", "append",
      "reverse", "equal?", "not", "display", "newline",
      "+", "-", "*", "<", ">", "<=", ">=", "="};
  for (const auto& n : names)
    if (n == name) return true;
  return false;
}

ValuePtr eval(const DatumPtr& expr, const EnvPtr& env) {
  switch (expr->kind) {
    case Datum::Kind::Number:
    case Datum::Kind::Text:
    case Datum::Kind::Boolean:
      return data(expr);
    case Datum::Kind::Keyword:
      throw EvalError("keyword outside define-with-docs: #:" + expr->atom);
    case Datum::Kind::Quoted:
      return data(expr->items[0]);
    case Datum::Kind::Symbol: {
      if (auto* v = env->find(expr->atom)) return *v;
      if (is_builtin(expr->atom)) return data(Datum::symbol(expr->atom));
      throw EvalError("unbound variable '" + expr->atom + "'");
    }
    case Datum::Kind::List:
      break;
  }
  const auto& items = expr->items;
  if (items.empty()) throw EvalError("cannot evaluate ()");
  if (items[0]->kind == Datum::Kind::Symbol) {
    const std::string& head = items[0]->atom;
    if (head == "quote") return data(items.at(1));
    if (head == "define") {
      if (items.size() < 3) throw EvalError("malformed define");
      if (items[1]->kind == Datum::Kind::List) {
        // (define (name params...) body...)
        const auto& sig = items[1]->items;
        if (sig.empty() || sig[0]->kind != Datum::Kind::Symbol)
          throw EvalError("malformed define signature");
        Closure clo;
        for (std::size_t i = 1; i < sig.size(); ++i) clo.params.push_back(sig[i]->atom);
        clo.body.assign(items.begin() + 2, items.end());
        clo.env = env;
        env->vars[sig[0]->atom] = std::make_shared<Value>(Value{std::move(clo)});
      } else {
        env->vars[items[1]->atom] = eval(items[2], env);
      }
      return data(Datum::boolean(true));
    }
    if (head == "lambda") {
      Closure clo;
      for (const auto& p : items.at(1)->items) clo.params.push_back(p->atom);
      clo.body.assign(items.begin() + 2, items.end());
      clo.env = env;
      return std::make_shared<Value>(Value{std::move(clo)});
    }
    if (head == "if") {
      if (truthy(eval(items.at(1), env))) return eval(items.at(2), env);
      return items.size() > 3 ? eval(items[3], env) : data(Datum::boolean(false));
    }
    if (head == "cond") {
      for (std::size_t i = 1; i < items.size(); ++i) {
        const auto& clause = items[i]->items;
        if (clause.empty()) throw EvalError("malformed cond clause");
        if (clause[0]->is_symbol("else") || truthy(eval(clause[0], env)))
          return eval_body({clause.begin() + 1, clause.end()}, env);
      }
      return data(Datum::boolean(false));
    }
    if (head == "and") {
      ValuePtr last = data(Datum::boolean(true));
      for (std::size_t i = 1; i < items.size(); ++i) {
        last = eval(items[i], env);
        if (!truthy(last)) return last;
      }
      return last;
    }
    if (head == "or") {
      for (std::size_t i = 1; i < items.size(); ++i) {
        ValuePtr v = eval(items[i], env);
        if (truthy(v)) return v;
      }
      return data(Datum::boolean(false));
    }
    if (head == "let" || head == "let*") {
      auto frame = std::make_shared<Env>();
      frame->parent = env;
      for (const auto& binding : items.at(1)->items) {
        const auto& pair = binding->items;
        if (pair.size() != 2 || pair[0]->kind != Datum::Kind::Symbol)
          throw EvalError("malformed " + head + " binding");
        // plain let evaluates in the outer env, let* in the growing frame
        frame->vars[pair[0]->atom] = eval(pair[1], head == "let" ? env : frame);
      }
      return eval_body({items.begin() + 2, items.end()}, frame);
    }
    if (head == "begin") return eval_body({items.begin() + 1, items.end()}, env);
    if (head == "define-with-docs") return data(Datum::boolean(true));  // doc-only
  }
  // Application.
  ValuePtr fn = eval(items[0], env);
  std::vector<ValuePtr> args;
  for (std::size_t i = 1; i < items.size(); ++i) args.push_back(eval(items[i], env));
  if (const auto* d = std::get_if<DatumPtr>(&fn->v);
      d && (*d)->kind == Datum::Kind::Symbol && is_builtin((*d)->atom))
    return builtin((*d)->atom, args);
  return apply_closure(fn, args);
}

}  // namespace

int main() {
  std::stringstream ss;
  ss << std::cin.rdbuf();
  try {
    auto program = ilp::parse_all_datums(ss.str(), "<stdin>");
    auto global = std::make_shared<Env>();
    for (const auto& form : program) eval(form, global);
  } catch (const std::exception& e) {
    std::cerr << "mini-scheme: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
