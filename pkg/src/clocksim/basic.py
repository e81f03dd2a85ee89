"""Lexer, parser, and interpreter for the clock's line-oriented BASIC dialect.

The dialect covers exactly what the firmware needs: If/Then/Else blocks,
Do/Loop with Exit Loop, Incr/Decr, signed 16-bit variables and +/-,
pin reads (P<port>.<bit>), and the LCD/timing intrinsics (Lcd, Locate,
Deflcdchar, Cls, Waitms, Scan).  There are no strings, arrays, Goto, or
subroutines.

Execution is cooperative: entering a Do loop and every jump back to its
top is a scan yield, where the interpreter bumps ``scan_counter`` and
gives the harness a chance to refresh pin levels or stop the run.  A
bare ``Scan`` statement yields the same way.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_INT16_MASK = 0xFFFF

KEYWORDS = frozenset(
    """
    if then else end do loop exit incr decr
    lcd chr locate deflcdchar cls waitms scan
    """.split()
)


class LexError(Exception):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class ParseError(Exception):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnterminatedIf(ParseError):
    pass


class UnterminatedDo(ParseError):
    pass


class ExitOutsideLoop(ParseError):
    pass


class MalformedStatement(ParseError):
    pass


class FuelExhausted(Exception):
    """The statement budget ran out; the program is probably spinning."""


class UndefinedPinPort(Exception):
    """A pin was read on a port the environment does not provide."""


class BasicRuntimeError(Exception):
    """An intrinsic was called with out-of-range arguments."""


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | identifier | pin-ref | integer | operator | end-of-line
    lexeme: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t]+)
      | (?P<comment>'[^\n]*)
      | (?P<pin>[Pp]\d+\.\d+)
      | (?P<int>\d+)
      | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<op><>|[=<>+\-();,])
    """,
    re.VERBOSE,
)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    for line_no, line in enumerate(source.splitlines(), start=1):
        pos = 0
        line_had_tokens = False
        while pos < len(line):
            m = _TOKEN_RE.match(line, pos)
            if m is None:
                raise LexError(line_no, pos + 1, f"illegal character {line[pos]!r}")
            pos = m.end()
            if m.lastgroup in ("ws", "comment"):
                continue
            col = m.start() + 1
            lexeme = m.group()
            if m.lastgroup == "pin":
                port, bit = lexeme[1:].split(".")
                if not (0 <= int(port) <= 3 and 0 <= int(bit) <= 7):
                    raise LexError(line_no, col, f"pin out of range: {lexeme}")
                kind = "pin-ref"
            elif m.lastgroup == "int":
                kind = "integer"
            elif m.lastgroup == "word":
                kind = "keyword" if lexeme.lower() in KEYWORDS else "identifier"
            else:
                kind = "operator"
            tokens.append(Token(kind, lexeme, line_no, col))
            line_had_tokens = True
        if line_had_tokens:
            tokens.append(Token("end-of-line", "", line_no, len(line) + 1))
    return tokens


# ---------------------------------------------------------------------------
# AST.  Nodes carry no source positions so structural equality is exactly
# "same program", which is what the printer round-trip property needs.

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class VarRef:
    name: str  # case-folded


@dataclass(frozen=True)
class PinRef:
    port: int
    bit: int


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str  # = <> < > + -
    left: object
    right: object


@dataclass(frozen=True)
class ChrCall:
    """Chr(expr): the raw character code, valid only as an Lcd argument."""

    code: object


@dataclass(frozen=True)
class Assign:
    name: str
    expr: object


@dataclass(frozen=True)
class Incr:
    name: str


@dataclass(frozen=True)
class Decr:
    name: str


@dataclass(frozen=True)
class If:
    cond: object
    then_block: tuple
    else_block: tuple | None = None


@dataclass(frozen=True)
class DoLoop:
    body: tuple


@dataclass(frozen=True)
class ExitLoop:
    pass


@dataclass(frozen=True)
class Scan:
    pass


@dataclass(frozen=True)
class LcdPrint:
    args: tuple  # Expr or ChrCall


@dataclass(frozen=True)
class LcdLocate:
    row: object
    col: object


@dataclass(frozen=True)
class DefChar:
    slot: object
    rows: tuple  # 8 exprs


@dataclass(frozen=True)
class Cls:
    pass


@dataclass(frozen=True)
class Waitms:
    duration: object


@dataclass(frozen=True)
class Program:
    body: tuple


_BLOCK_HEADS = ("end", "else", "loop")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1].line if self.tokens else 1
            raise MalformedStatement(last, "unexpected end of input")
        self.i += 1
        return tok

    def expect_keyword(self, word: str) -> Token:
        tok = self.take()
        if tok.kind != "keyword" or tok.lexeme.lower() != word:
            raise MalformedStatement(tok.line, f"expected {word!r}, got {tok.lexeme!r}")
        return tok

    def expect_eol(self):
        tok = self.take()
        if tok.kind != "end-of-line":
            raise MalformedStatement(
                tok.line, f"unexpected {tok.lexeme!r} at end of statement"
            )

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return (
            tok is not None
            and tok.kind == "keyword"
            and tok.lexeme.lower() in words
        )

    # -- grammar -----------------------------------------------------------

    def parse_program(self) -> Program:
        body = self.parse_block(loop_depth=0)
        tok = self.peek()
        if tok is not None:
            raise MalformedStatement(
                tok.line, f"{tok.lexeme!r} outside any block"
            )
        return Program(tuple(body))

    def parse_block(self, loop_depth: int) -> list:
        """Statements until EOF or a block-closing head (End/Else/Loop)."""
        stmts = []
        while True:
            tok = self.peek()
            if tok is None or self.at_keyword(*_BLOCK_HEADS):
                return stmts
            stmts.append(self.parse_statement(loop_depth))

    def parse_statement(self, loop_depth: int):
        tok = self.take()
        if tok.kind == "identifier":
            op = self.take()
            if op.kind != "operator" or op.lexeme != "=":
                raise MalformedStatement(op.line, "expected '=' after variable name")
            expr = self.parse_expr()
            self.expect_eol()
            return Assign(tok.lexeme.lower(), expr)
        if tok.kind != "keyword":
            raise MalformedStatement(tok.line, f"cannot start a statement with {tok.lexeme!r}")

        word = tok.lexeme.lower()
        if word == "if":
            return self.parse_if(tok, loop_depth)
        if word == "do":
            self.expect_eol()
            body = self.parse_block(loop_depth + 1)
            nxt = self.peek()
            if nxt is None or not self.at_keyword("loop"):
                line = nxt.line if nxt else tok.line
                raise UnterminatedDo(line, "Do without matching Loop")
            self.take()
            self.expect_eol()
            return DoLoop(tuple(body))
        if word == "exit":
            self.expect_keyword("loop")
            self.expect_eol()
            if loop_depth == 0:
                raise ExitOutsideLoop(tok.line, "Exit Loop outside any Do loop")
            return ExitLoop()
        if word in ("incr", "decr"):
            name = self.take()
            if name.kind != "identifier":
                raise MalformedStatement(name.line, f"expected variable after {tok.lexeme}")
            self.expect_eol()
            return (Incr if word == "incr" else Decr)(name.lexeme.lower())
        if word == "lcd":
            return self.parse_lcd()
        if word == "locate":
            row = self.parse_expr()
            self.expect_comma()
            col = self.parse_expr()
            self.expect_eol()
            return LcdLocate(row, col)
        if word == "deflcdchar":
            slot = self.parse_expr()
            rows = []
            for _ in range(8):
                self.expect_comma()
                rows.append(self.parse_expr())
            self.expect_eol()
            return DefChar(slot, tuple(rows))
        if word == "cls":
            self.expect_eol()
            return Cls()
        if word == "scan":
            self.expect_eol()
            return Scan()
        if word == "waitms":
            expr = self.parse_expr()
            self.expect_eol()
            return Waitms(expr)
        raise MalformedStatement(tok.line, f"{tok.lexeme!r} cannot start a statement")

    def parse_if(self, if_tok: Token, loop_depth: int) -> If:
        cond = self.parse_expr()
        self.expect_keyword("then")
        self.expect_eol()
        then_block = self.parse_block(loop_depth)
        tok = self.peek()
        if tok is None or self.at_keyword("loop"):
            line = tok.line if tok else if_tok.line
            raise UnterminatedIf(line, "If without matching End If")
        else_block = None
        if self.at_keyword("else"):
            self.take()
            self.expect_eol()
            else_block = tuple(self.parse_block(loop_depth))
            tok = self.peek()
            if tok is None or self.at_keyword("loop", "else"):
                line = tok.line if tok else if_tok.line
                raise UnterminatedIf(line, "If without matching End If")
        end = self.expect_keyword("end")
        nxt = self.take()
        if nxt.kind != "keyword" or nxt.lexeme.lower() != "if":
            raise MalformedStatement(end.line, f"expected 'End If', got 'End {nxt.lexeme}'")
        self.expect_eol()
        return If(cond, tuple(then_block), else_block)

    def parse_lcd(self) -> LcdPrint:
        args = [self.parse_lcd_arg()]
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == "operator" and tok.lexeme == ";":
                self.take()
                args.append(self.parse_lcd_arg())
            else:
                break
        self.expect_eol()
        return LcdPrint(tuple(args))

    def parse_lcd_arg(self):
        if self.at_keyword("chr"):
            tok = self.take()
            self.expect_operator("(")
            code = self.parse_expr()
            self.expect_operator(")")
            return ChrCall(code)
        return self.parse_expr()

    def expect_operator(self, op: str):
        tok = self.take()
        if tok.kind != "operator" or tok.lexeme != op:
            raise MalformedStatement(tok.line, f"expected {op!r}, got {tok.lexeme!r}")

    def expect_comma(self):
        self.expect_operator(",")

    # expressions: comparison over additive over unary over atoms

    def parse_expr(self):
        left = self.parse_additive()
        tok = self.peek()
        if tok is not None and tok.kind == "operator" and tok.lexeme in ("=", "<>", "<", ">"):
            self.take()
            right = self.parse_additive()
            return BinOp(tok.lexeme, left, right)
        return left

    def parse_additive(self):
        left = self.parse_unary()
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == "operator" and tok.lexeme in ("+", "-"):
                self.take()
                left = BinOp(tok.lexeme, left, self.parse_unary())
            else:
                return left

    def parse_unary(self):
        tok = self.peek()
        if tok is not None and tok.kind == "operator" and tok.lexeme == "-":
            self.take()
            operand = self.parse_unary()
            if isinstance(operand, IntLit):
                return IntLit(-operand.value)
            return Neg(operand)
        return self.parse_atom()

    def parse_atom(self):
        tok = self.take()
        if tok.kind == "integer":
            return IntLit(int(tok.lexeme))
        if tok.kind == "identifier":
            return VarRef(tok.lexeme.lower())
        if tok.kind == "pin-ref":
            port, bit = tok.lexeme[1:].split(".")
            return PinRef(int(port), int(bit))
        if tok.kind == "operator" and tok.lexeme == "(":
            inner = self.parse_expr()
            self.expect_operator(")")
            return inner
        raise MalformedStatement(tok.line, f"expected a value, got {tok.lexeme!r}")


def parse(tokens: list[Token]) -> Program:
    return _Parser(tokens).parse_program()


def parse_source(source: str) -> Program:
    return parse(tokenize(source))


# ---------------------------------------------------------------------------
# Pretty printer.  Canonical layout; parse(format(p)) == p.

def format_expr(expr) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, VarRef):
        return expr.name.capitalize()
    if isinstance(expr, PinRef):
        return f"P{expr.port}.{expr.bit}"
    if isinstance(expr, Neg):
        return f"-{_format_operand(expr.operand)}"
    if isinstance(expr, BinOp):
        left = _format_operand(expr.left, expr.op, right_side=False)
        right = _format_operand(expr.right, expr.op, right_side=True)
        return f"{left} {expr.op} {right}"
    raise TypeError(f"not an expression: {expr!r}")


def _format_operand(expr, parent_op: str | None = None, right_side: bool = False) -> str:
    text = format_expr(expr)
    if not isinstance(expr, BinOp):
        return text
    comparison = expr.op in ("=", "<>", "<", ">")
    if parent_op is None:
        return f"({text})"
    if parent_op in ("=", "<>", "<", ">"):
        return f"({text})" if comparison else text
    # additive parent: parenthesize comparisons and right-nested additions
    if comparison or right_side:
        return f"({text})"
    return text


def format_program(program: Program) -> str:
    lines: list[str] = []
    _format_block(program.body, 0, lines)
    return "\n".join(lines) + "\n"


def _format_block(block, depth: int, lines: list):
    pad = "  " * depth
    for stmt in block:
        if isinstance(stmt, Assign):
            lines.append(f"{pad}{stmt.name.capitalize()} = {format_expr(stmt.expr)}")
        elif isinstance(stmt, Incr):
            lines.append(f"{pad}Incr {stmt.name.capitalize()}")
        elif isinstance(stmt, Decr):
            lines.append(f"{pad}Decr {stmt.name.capitalize()}")
        elif isinstance(stmt, If):
            lines.append(f"{pad}If {format_expr(stmt.cond)} Then")
            _format_block(stmt.then_block, depth + 1, lines)
            if stmt.else_block is not None:
                lines.append(f"{pad}Else")
                _format_block(stmt.else_block, depth + 1, lines)
            lines.append(f"{pad}End If")
        elif isinstance(stmt, DoLoop):
            lines.append(f"{pad}Do")
            _format_block(stmt.body, depth + 1, lines)
            lines.append(f"{pad}Loop")
        elif isinstance(stmt, ExitLoop):
            lines.append(f"{pad}Exit Loop")
        elif isinstance(stmt, Scan):
            lines.append(f"{pad}Scan")
        elif isinstance(stmt, LcdPrint):
            args = " ; ".join(
                f"Chr({format_expr(a.code)})" if isinstance(a, ChrCall) else format_expr(a)
                for a in stmt.args
            )
            lines.append(f"{pad}Lcd {args}")
        elif isinstance(stmt, LcdLocate):
            lines.append(f"{pad}Locate {format_expr(stmt.row)} , {format_expr(stmt.col)}")
        elif isinstance(stmt, DefChar):
            rows = " , ".join(format_expr(r) for r in stmt.rows)
            lines.append(f"{pad}Deflcdchar {format_expr(stmt.slot)} , {rows}")
        elif isinstance(stmt, Cls):
            lines.append(f"{pad}Cls")
        elif isinstance(stmt, Waitms):
            lines.append(f"{pad}Waitms {format_expr(stmt.duration)}")
        else:
            raise TypeError(f"not a statement: {stmt!r}")


# ---------------------------------------------------------------------------
# Interpreter.

def _wrap16(value: int) -> int:
    return ((value + 0x8000) & _INT16_MASK) - 0x8000


def _default_pins() -> dict:
    # buttons live on port 3; active-low, so released = 1
    return {(3, bit): 1 for bit in range(8)}


@dataclass
class Env:
    variables: dict = field(default_factory=dict)
    pins: dict = field(default_factory=_default_pins)
    lcd_sink: object = None
    wait_sink: object = None
    scan_hook: object = None
    scan_counter: int = 0
    lcd_log: list = field(default_factory=list)


def bind_machine(env: Env, lcd_sink=None, wait_sink=None, scan_hook=None) -> Env:
    """Attach the machine half: LCD byte sink, wait sink, per-scan hook.

    ``lcd_sink(rs, byte)`` receives controller writes; ``wait_sink(ms)``
    receives Waitms durations; ``scan_hook(env)`` runs at every scan
    yield and may return False to stop the run cleanly.
    """
    if lcd_sink is not None:
        env.lcd_sink = lcd_sink
    if wait_sink is not None:
        env.wait_sink = wait_sink
    if scan_hook is not None:
        env.scan_hook = scan_hook
    return env


class _ExitLoopSignal(Exception):
    pass


class _StopRun(Exception):
    pass


class _Runner:
    def __init__(self, env: Env, fuel: int):
        self.env = env
        self.fuel = fuel

    def spend(self, line_of: str):
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelExhausted(f"statement budget exhausted at {line_of}")

    def scan_yield(self):
        self.spend("scan yield")
        self.env.scan_counter += 1
        if self.env.scan_hook is not None:
            if self.env.scan_hook(self.env) is False:
                raise _StopRun()

    def exec_block(self, block):
        for stmt in block:
            self.exec_stmt(stmt)

    def exec_stmt(self, stmt):
        if isinstance(stmt, DoLoop):
            self.spend("Do")
            while True:
                self.scan_yield()
                try:
                    self.exec_block(stmt.body)
                except _ExitLoopSignal:
                    return
            # not reached
        self.spend(type(stmt).__name__)
        if isinstance(stmt, Assign):
            self.env.variables[stmt.name] = _wrap16(self.eval(stmt.expr))
        elif isinstance(stmt, Incr):
            self.env.variables[stmt.name] = _wrap16(
                self.env.variables.get(stmt.name, 0) + 1
            )
        elif isinstance(stmt, Decr):
            self.env.variables[stmt.name] = _wrap16(
                self.env.variables.get(stmt.name, 0) - 1
            )
        elif isinstance(stmt, If):
            if self.eval(stmt.cond) != 0:
                self.exec_block(stmt.then_block)
            elif stmt.else_block is not None:
                self.exec_block(stmt.else_block)
        elif isinstance(stmt, ExitLoop):
            raise _ExitLoopSignal()
        elif isinstance(stmt, Scan):
            self.scan_yield()
        elif isinstance(stmt, LcdPrint):
            codes = []
            for arg in stmt.args:
                if isinstance(arg, ChrCall):
                    codes.append(self.eval(arg.code) & 0xFF)
                else:
                    codes.extend(ord(ch) for ch in str(self.eval(arg)))
            self.lcd_emit([(1, c) for c in codes], ("lcd", tuple(codes)))
        elif isinstance(stmt, LcdLocate):
            row, col = self.eval(stmt.row), self.eval(stmt.col)
            if not (1 <= row <= 2 and 1 <= col <= 40):
                raise BasicRuntimeError(f"Locate {row}, {col} out of range")
            addr = (row - 1) * 0x40 + (col - 1)
            self.lcd_emit([(0, 0x80 | addr)], ("locate", row, col))
        elif isinstance(stmt, DefChar):
            slot = self.eval(stmt.slot)
            if not 0 <= slot <= 7:
                raise BasicRuntimeError(f"Deflcdchar slot {slot} out of range")
            rows = tuple(self.eval(r) & 0x1F for r in stmt.rows)
            writes = [(0, 0x40 | (slot * 8))]
            writes += [(1, r) for r in rows]
            writes.append((0, 0x80))
            self.lcd_emit(writes, ("defchar", slot, rows))
        elif isinstance(stmt, Cls):
            self.lcd_emit([(0, 0x01)], ("cls",))
        elif isinstance(stmt, Waitms):
            ms = self.eval(stmt.duration)
            if ms < 0:
                raise BasicRuntimeError(f"Waitms {ms} is negative")
            if self.env.wait_sink is not None:
                self.env.wait_sink(ms)
        else:
            raise TypeError(f"not a statement: {stmt!r}")

    def lcd_emit(self, writes, record):
        if self.env.lcd_sink is None:
            self.env.lcd_log.append(record)
        else:
            for rs, byte in writes:
                self.env.lcd_sink(rs, byte)

    def eval(self, expr) -> int:
        if isinstance(expr, IntLit):
            return expr.value
        if isinstance(expr, VarRef):
            return self.env.variables.get(expr.name, 0)
        if isinstance(expr, PinRef):
            key = (expr.port, expr.bit)
            if key not in self.env.pins:
                raise UndefinedPinPort(f"P{expr.port}.{expr.bit} is not bound")
            return self.env.pins[key]
        if isinstance(expr, Neg):
            return _wrap16(-self.eval(expr.operand))
        if isinstance(expr, BinOp):
            left = self.eval(expr.left)
            right = self.eval(expr.right)
            if expr.op == "+":
                return _wrap16(left + right)
            if expr.op == "-":
                return _wrap16(left - right)
            if expr.op == "=":
                return 1 if left == right else 0
            if expr.op == "<>":
                return 1 if left != right else 0
            if expr.op == "<":
                return 1 if left < right else 0
            if expr.op == ">":
                return 1 if left > right else 0
        raise TypeError(f"not an expression: {expr!r}")


def load_firmware_asset(name: str) -> str:
    """Source text of a firmware file shipped inside the package."""
    from importlib import resources

    return (
        resources.files("clocksim")
        .joinpath(f"assets/firmware/{name}")
        .read_text(encoding="utf-8")
    )


def run(program: Program, env: Env | None = None, fuel: int = 100_000) -> Env:
    """Execute the program until it ends, fuel runs out, or the hook stops it."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    if env is None:
        env = Env()
    runner = _Runner(env, fuel)
    try:
        runner.exec_block(program.body)
    except _StopRun:
        pass
    except _ExitLoopSignal:  # pragma: no cover - parser forbids this
        raise AssertionError("Exit Loop escaped its loop")
    return env
