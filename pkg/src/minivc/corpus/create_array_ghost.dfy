method CreateArray<T> (n:int) returns (a:array<T>)
  requires n >= 1;
{
a:= new T[n];
var i := 0;
ghost var c := 1;
while i != n/2
	invariant 0 <= i <= n && c <= n;
	invariant c == 2*(n-i) || c == 2*i+1;
	decreases n-c;
	{
	i := if i < n/2 then n - i - 1 else n - i;
	// here some code for generating a[i]
	c := c + 1;
	}
}
