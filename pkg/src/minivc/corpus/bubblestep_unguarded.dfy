predicate permutation (a:seq<int>,b:seq<int>)
{  multiset(a) == multiset(b)  }

predicate sortedBetween (a:array<int>, lo:int, hi:int)
  requires a != null && 0 <= lo <= hi <= a.Length
  reads a
{  forall i,j :: lo <= i < j < hi ==> a[i] <= a[j] }

predicate sorted (a:array<int>)
  requires a != null
  reads a
{ sortedBetween(a,0,a.Length) }

method bubbleSort (a: array<int>)
  requires a != null
  modifies a
  ensures sorted(a)
  ensures permutation(a[..],old(a[..]))
{
if a.Length > 1
	{
	var i := 1;
	while i < a.Length
		invariant 1 <= i <= a.Length;
		invariant sortedBetween(a,0,i);
		invariant permutation(a[..],old(a[..]));
		{
		bubbleStep(a,i);
		i:= i+1;
		}
	}
}

method bubbleStep (a: array<int>, i:int)
  requires a != null && 0 <= i < a.Length && sortedBetween(a,0,i)
  modifies a
  ensures sortedBetween(a,0,i+1)
  ensures permutation(a[..],old(a[..]))
{
var j := i;
while j > 0 && a[j-1] > a[j]
	invariant 0 <= j <= i && sortedBetween(a,0,j) && sortedBetween(a,j,i+1);
	invariant j+1 <= i ==> a[j-1] <= a[j+1];
	invariant permutation(a[..],old(a[..]));
	{
	a[j-1],a[j] := a[j],a[j-1];
	j := j-1;
	}
}
