"""
文本 DSL 解析

约束、模型、公式、博弈与图灵机五种文本格式共用一套 lark 语法片段，
解析失败统一转换为带行列号的 InputError。
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from lark import Lark, Transformer
from lark.exceptions import UnexpectedEOF, UnexpectedInput, VisitError

from app.atoms import AtomSort, Literal, Neg, TRUE, FALSE, conj, disj
from app import formulas as F
from app.utils import InputError

_COMMON = r"""
?constraint: c_or
?c_or: c_and
     | c_or "or" c_and -> c_disj
?c_and: c_not
      | c_and "and" c_not -> c_conj
?c_not: "not" c_not -> c_neg
      | c_atom
?c_atom: NAME CMP NAME -> c_lit
       | "true" -> c_true
       | "false" -> c_false
       | "(" c_or ")"

names: NAME ("," NAME)*
terms: NAME ("," NAME)*

CMP: "!=" | "<=" | ">=" | "=" | "<" | ">"
NAME: /[A-Za-z_][A-Za-z0-9_]*/
COMMENT: /#[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""

_DECLS = r"""
atoms_decl: "atoms" "equality" -> atoms_equality
          | "atoms" "ordered" -> atoms_ordered
const_decl: "const" const_item (SEP const_item)*
const_item: NAME ["=" WITNESS]
SEP: "<" | ","
WITNESS: /-?\d+(\/\d+)?/
"""

_FORMULA = r"""
start: formula

?formula: f_or
        | "OR" [names] ["where" constraint] "." formula -> orbit_or
        | "AND" [names] ["where" constraint] "." formula -> orbit_and
        | "mu" NAME "." formula -> mu_scalar
        | "nu" NAME "." formula -> nu_scalar
        | "mu" NAME "(" [terms] ")" "{" equation (";" equation)* [";"] "}" -> mu_vector
        | "nu" NAME "(" [terms] ")" "{" equation (";" equation)* [";"] "}" -> nu_vector
?f_or: f_and
     | f_or "\\/" f_and -> or_
?f_and: f_un
      | f_and "/\\" f_un -> and_
?f_un: "~" f_un -> not_
     | "<>" f_un -> diamond
     | "[]" f_un -> box
     | f_atom
?f_atom: "true" -> true_
       | "false" -> false_
       | NAME "(" [terms] ")" -> app
       | NAME -> app0
       | "(" formula ")"

equation: NAME "(" [names] ")" ["where" constraint] ":=" formula
""" + _COMMON

_MODEL = r"""
start: item*
?item: atoms_decl | const_decl | state_decl | label_decl | trans_decl

state_decl: "state" NAME "(" [names] ")" ["where" constraint]
label_decl: "label" NAME "(" [terms] ")" ":" NAME "(" [terms] ")" ["where" constraint]
trans_decl: "trans" NAME "(" [terms] ")" "->" NAME "(" [terms] ")" ["where" constraint]
""" + _DECLS + _COMMON

_GAME = r"""
start: item*
?item: atoms_decl | const_decl | node_decl | owner_decl | rank_decl | edge_decl

node_decl: "node" NAME "(" [names] ")" ["where" constraint]
owner_decl: "owner" NAME "(" [names] ")" ["where" constraint]
rank_decl: "rank" INT NAME "(" [names] ")" ["where" constraint]
edge_decl: "edge" NAME "(" [terms] ")" "->" NAME "(" [terms] ")" ["where" constraint]

%import common.INT
""" + _DECLS + _COMMON

_TM = r"""
start: item*
?item: "states" SYM+ -> states
     | "alphabet" SYM+ -> alphabet
     | "init" SYM -> init
     | "accept" SYM -> accept
     | "rule" SYM SYM "->" SYM SYM "L" -> rule_left
     | "rule" SYM SYM "->" SYM SYM "R" -> rule_right

SYM: /[A-Za-z0-9]+/
COMMENT: /#[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""


@lru_cache(maxsize=None)
def _parser(kind: str) -> Lark:
    grammar = {"formula": _FORMULA, "model": _MODEL, "game": _GAME, "tm": _TM}[kind]
    return Lark(grammar, parser="lalr", maybe_placeholders=True)


def _parse(kind: str, text: str, transformer: Transformer):
    try:
        tree = _parser(kind).parse(text)
        return transformer.transform(tree)
    except UnexpectedEOF as e:
        raise InputError(f"{kind} 语法错误：输入意外结束", detail=str(e))
    except UnexpectedInput as e:
        raise InputError(f"{kind} 语法错误（第 {e.line} 行，第 {e.column} 列）", detail=str(e))
    except VisitError as e:
        if isinstance(e.orig_exc, InputError):
            raise e.orig_exc
        raise InputError(f"{kind} 解析失败：{e.orig_exc}")


def _names(node) -> tuple[str, ...]:
    return tuple(node) if node is not None else ()


class _ConstraintMixin:
    """约束片段的公共变换"""

    def names(self, items):
        return tuple(str(t) for t in items)

    def terms(self, items):
        return tuple(str(t) for t in items)

    def c_lit(self, items):
        left, op, right = items
        return Literal(str(op), str(left), str(right))

    def c_true(self, _):
        return TRUE

    def c_false(self, _):
        return FALSE

    def c_conj(self, items):
        return conj(*items)

    def c_disj(self, items):
        return disj(*items)

    def c_neg(self, items):
        return Neg(items[0])


def _where(c) -> object:
    return TRUE if c is None else c


class _FormulaTransformer(_ConstraintMixin, Transformer):
    def start(self, items):
        return items[0]

    def true_(self, _):
        return F.TT

    def false_(self, _):
        return F.FF

    def app(self, items):
        name, args = str(items[0]), _names(items[1])
        if name[0].isupper():
            return F.Var(name, args)
        return F.Pred(name, args)

    def app0(self, items):
        name = str(items[0])
        if name[0].isupper():
            return F.Var(name)
        return F.Pred(name)

    def not_(self, items):
        return F.Not(items[0])

    def diamond(self, items):
        return F.Diamond(items[0])

    def box(self, items):
        return F.Box(items[0])

    def or_(self, items):
        return F.Or(items[0], items[1])

    def and_(self, items):
        return F.And(items[0], items[1])

    def orbit_or(self, items):
        vars, where, body = items
        return F.OrbitOr(_names(vars), _where(where), body)

    def orbit_and(self, items):
        vars, where, body = items
        return F.OrbitAnd(_names(vars), _where(where), body)

    def mu_scalar(self, items):
        return F.mu(str(items[0]), items[1])

    def nu_scalar(self, items):
        return F.nu(str(items[0]), items[1])

    def _vector(self, kind, items):
        name, args, *equations = items
        return F.Fix(kind, tuple(eq for eq in equations if eq is not None), str(name), _names(args))

    def mu_vector(self, items):
        return self._vector("mu", items)

    def nu_vector(self, items):
        return self._vector("nu", items)

    def equation(self, items):
        name, params, guard, body = items
        return F.Equation(str(name), _names(params), _where(guard), body)


def parse_formula_text(text: str):
    """公式 DSL -> AST（不做换名与校验）"""
    return _parse("formula", text, _FormulaTransformer())


@dataclass
class Declarations:
    """模型与博弈文件的声明列表"""
    sort: Optional[AtomSort] = None
    consts: list = field(default_factory=list)
    states: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    trans: list = field(default_factory=list)
    owners: list = field(default_factory=list)
    ranks: list = field(default_factory=list)


class _DeclTransformer(_ConstraintMixin, Transformer):
    def __init__(self):
        super().__init__()
        self.decls = Declarations()

    def start(self, _):
        return self.decls

    def _set_sort(self, sort: AtomSort):
        if self.decls.sort is not None:
            raise InputError("atoms 声明重复")
        self.decls.sort = sort

    def atoms_equality(self, _):
        self._set_sort(AtomSort.EQUALITY)

    def atoms_ordered(self, _):
        self._set_sort(AtomSort.ORDERED)

    def const_item(self, items):
        name, value = items
        self.decls.consts.append((str(name), None if value is None else str(value)))

    def const_decl(self, _):
        return None

    def state_decl(self, items):
        tag, vars, c = items
        self.decls.states.append((str(tag), _names(vars), _where(c)))

    node_decl = state_decl

    def label_decl(self, items):
        tag, terms, ptag, pterms, c = items
        self.decls.labels.append((str(tag), _names(terms), str(ptag), _names(pterms), _where(c)))

    def trans_decl(self, items):
        tag, terms, tag2, terms2, c = items
        self.decls.trans.append((str(tag), _names(terms), str(tag2), _names(terms2), _where(c)))

    edge_decl = trans_decl

    def owner_decl(self, items):
        tag, vars, c = items
        self.decls.owners.append((str(tag), _names(vars), _where(c)))

    def rank_decl(self, items):
        rank, tag, vars, c = items
        self.decls.ranks.append((int(rank), str(tag), _names(vars), _where(c)))


def parse_model_text(text: str) -> Declarations:
    return _parse("model", text, _DeclTransformer())


def parse_game_text(text: str) -> Declarations:
    return _parse("game", text, _DeclTransformer())


@dataclass
class MachineSource:
    states: list = field(default_factory=list)
    alphabet: list = field(default_factory=list)
    init: Optional[str] = None
    accept: Optional[str] = None
    rules: list = field(default_factory=list)


class _MachineTransformer(Transformer):
    def __init__(self):
        super().__init__()
        self.source = MachineSource()

    def start(self, _):
        return self.source

    def states(self, items):
        self.source.states.extend(str(s) for s in items)

    def alphabet(self, items):
        self.source.alphabet.extend(str(s) for s in items)

    def init(self, items):
        self.source.init = str(items[0])

    def accept(self, items):
        self.source.accept = str(items[0])

    def _rule(self, items, move: str):
        q, g, q2, g2 = (str(s) for s in items)
        self.source.rules.append((q, g, q2, g2, move))

    def rule_left(self, items):
        self._rule(items, "L")

    def rule_right(self, items):
        self._rule(items, "R")


def parse_machine_text(text: str) -> MachineSource:
    return _parse("tm", text, _MachineTransformer())
