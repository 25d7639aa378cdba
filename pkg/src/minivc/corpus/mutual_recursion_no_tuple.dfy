datatype List<T> = Nil | Cons(head: T, tail: List<T>)

method M(xs: List<int>)
{
match xs
case Nil =>
case Cons(y, ys) =>
  M1(xs);
  M2(xs);
}

method M1(xs: List<int>)
{
if xs == Nil {
} else {
  M(xs.tail);
}
}

method M2(xs: List<int>)
{
if xs == Nil {
} else {
  M(xs.tail);
}
}
